#include <iostream>

#include "fredholm/runner.hpp"

int main(int argc, char** argv) { return fredholm::run_cli(argc, argv, std::cout, std::cerr); }
