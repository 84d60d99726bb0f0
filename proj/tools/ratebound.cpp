#include "ratebound/cli.hpp"

int main(int argc, char** argv)
{
    return ratebound::cli::run(argc, argv);
}
