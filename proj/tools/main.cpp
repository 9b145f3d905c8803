#include "cli.hpp"

int main(int argc, char** argv) { return saog::cli::run(argc, argv); }
