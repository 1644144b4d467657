#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bitsys {

// Entry point shared by the binary and the in-process CLI tests.
// args excludes the program name. Returns 0 on success, 1 when a
// verification or bit-exactness check fails, 2 on usage or file errors.
int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace bitsys
