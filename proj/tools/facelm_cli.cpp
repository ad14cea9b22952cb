#include <string>
#include <vector>

#include "facelm/cli.hpp"

int main(int argc, char** argv) {
  return facelm::cli::run(std::vector<std::string>(argv, argv + argc));
}
