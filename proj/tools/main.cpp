#include <string>
#include <vector>

#include "acess/cli.hpp"

int main(int argc, char** argv) {
  return acess::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
