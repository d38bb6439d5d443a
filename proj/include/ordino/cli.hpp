#pragma once

#include <iosfwd>

namespace ordino {

// Exit status: 0 success, 1 user error (bad flags, files, configs), 2 numerical
// failure (incoherent structure, no feasible fit, singular information).
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ordino
