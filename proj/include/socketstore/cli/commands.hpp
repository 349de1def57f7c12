#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace socketstore::cli {

struct CommandInfo {
  std::string name;
  std::string store_op;  // the Store member it drives, empty for local-only commands
  std::string summary;
};

/// Every subcommand, in help order.
const std::vector<CommandInfo>& command_table();

/// Data directory: $SOCKETSTORE_DATA, else ./socketstore-data.
std::filesystem::path default_data_dir();

/// Runs one CLI invocation (args exclude the program name). Returns the exit
/// status: 0 on success, 1 with an "error: <reason>" line on failure, 2 on
/// usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace socketstore::cli
