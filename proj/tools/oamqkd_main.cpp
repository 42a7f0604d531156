#include "oamqkd/cli.hpp"

int main(int argc, char** argv) { return oamqkd::cli::run(argc, argv); }
