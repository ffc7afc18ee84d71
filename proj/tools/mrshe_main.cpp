#include "mrshe/cli.hpp"

int main(int argc, char** argv) { return mrshe::run_cli(argc, argv); }
