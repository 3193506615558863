// SPDX-License-Identifier: Apache-2.0
#include "sfpc/cli.hpp"

int main(int argc, char** argv) { return sfpc::cli::run(argc, argv); }
