#include "rwcert/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return rwcert::run_command(argc, argv, std::cout, std::cerr); }
