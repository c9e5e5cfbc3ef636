#include "apcre/cli.hpp"

int main(int argc, char** argv) { return apcre::run_cli(argc, argv); }
