#include "radiant/app.hpp"

#include <iostream>

int main(int argc, char **argv) { return radiant::app::main(argc, argv, std::cout, std::cerr); }
