#include "srl/cli/app.hpp"

int main(int argc, char** argv) { return srl::cli::run(argc, argv, {std::cout, std::cerr}); }
