#include "homlab_cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return homlab::cli::run(argc, argv, std::cout, std::cerr); }
