#include "senticast/cli.hpp"

int main(int argc, char** argv) {
  return senticast::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
