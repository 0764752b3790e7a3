#include "eegfeat/cli.hpp"

int main(int argc, char** argv) {
    return eegfeat::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
