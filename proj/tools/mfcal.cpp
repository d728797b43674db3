#include <iostream>

#include "mfcal/cli.hpp"

int main(int argc, char** argv) { return mfcal::run_cli(argc, argv, std::cout, std::cerr); }
