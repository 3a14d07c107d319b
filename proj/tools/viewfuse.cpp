#include "viewfuse/cli.hpp"

int main(int argc, char** argv) { return viewfuse::run_cli(argc, argv); }
