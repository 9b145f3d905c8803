#pragma once

namespace saog::cli {

/// Entry point of the `saog` tool. Returns the process exit code:
/// 0 on success, 1 on a runtime failure, 2 on a usage error.
int run(int argc, char** argv);

} // namespace saog::cli
