#include "rsc/cli.hpp"

int
main(int argc, char** argv)
{
  return rsc::cli::run(argc, argv);
}
