#include <vector>
#include <string>

#include "topo/cli.hpp"

int main(int argc, char** argv) {
  return topo::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
