#include <string>
#include <vector>

#include "vlx/cli.hpp"

int main(int argc, char** argv) { return vlx::cli::run(std::vector<std::string>(argv + 1, argv + argc)); }
