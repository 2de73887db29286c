#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cdorisk/io.hpp"

namespace cdorisk {

enum ExitCode : int { kExitOk = 0, kExitAssertion = 1, kExitInput = 2 };

/// Output of one subcommand before it touches the filesystem.
struct CommandOutput {
    std::string file_name;        // written under RunConfig::output_dir
    std::string body;             // CSV or JSON text
    std::vector<std::string> violations;  // assertion failures, empty when fine
};

/// Subcommand names in help order.
const std::vector<std::string>& command_names();

CommandOutput cmd_price(const RunConfig& config);
CommandOutput cmd_cs01(const RunConfig& config);
CommandOutput cmd_vod_curve(const RunConfig& config);
/// With `check`, rows must follow the deterministic (No,Yes,Yes),
/// unregularized (Yes,Yes,No), regularized (Yes,No,Yes) pattern and no row
/// may be all Yes.
CommandOutput cmd_trio(const RunConfig& config, bool check);
CommandOutput cmd_figure1(const RunConfig& config);
CommandOutput cmd_figure2(const RunConfig& config);
CommandOutput cmd_figure4(const RunConfig& config);
CommandOutput cmd_appendix_verify(const RunConfig& config);
CommandOutput cmd_oracle_check(const RunConfig& config);

/// Runs a subcommand, writes its file, echoes the body to `out` and returns
/// the exit code. Input errors are reported on `err` with exit code 2.
int run_command(std::string_view command, const RunConfig& config, bool check, std::ostream& out,
                std::ostream& err);

/// "%.12g", independent of the global locale.
std::string format_number(double x);

}  // namespace cdorisk
