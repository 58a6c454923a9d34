#include <assouad/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return assouad::cli::run(argc, argv, std::cout, std::cerr); }
