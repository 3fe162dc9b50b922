#pragma once

// Command-line surface. Every subcommand is a pure function of its flags, the optional
// key=value config file and the seed; output files are written atomically.
//
// Exit codes: 0 ok, 1 usage, 2 certification failure or exhausted search, 3 budget or size
// limit, 4 I/O or file format.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pglfree/error.hpp"
#include "pglfree/io.hpp"
#include "pglfree/pgl.hpp"
#include "pglfree/tower.hpp"

namespace pglfree::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kFailure = 2, kBudget = 3, kIoFormat = 4 };

int exit_code_for(ErrorKind kind) noexcept;

/// Matrices separated by ';', entries by ',' or whitespace, e.g. "1,1,0,1;1,0,1,1".
/// Throws InvalidArgument or SingularMatrix.
std::vector<PglElement> parse_generators(std::string_view text, std::uint32_t p);

/// Re-checks every record of a parsed file without an RNG.
VerifyReport verify_file(const io::CertificateFile& file, const TowerOptions& opts);

/// argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// Arguments without the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pglfree::cli
