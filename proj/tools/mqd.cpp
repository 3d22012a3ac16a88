#include <mqd/cli.hpp>

int main(int argc, char** argv) { return mqd::run_cli(argc, argv); }
