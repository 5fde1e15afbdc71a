#include "bgnn/cli.hpp"

int main(int argc, char** argv) { return bgnn::run_cli(argc, argv); }
