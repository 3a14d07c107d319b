#pragma once

namespace viewfuse {

/// Entry point of the viewfuse command line. Returns 0 on success, 1 on a
/// usage error and 2 on a data error.
int run_cli(int argc, char** argv);

}  // namespace viewfuse
