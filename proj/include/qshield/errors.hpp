#pragma once

#include <stdexcept>
#include <string>

namespace qshield {

// Malformed concrete syntax (formula text or spec file). Carries line/column
// when the failing position is known.
class parse_error : public std::runtime_error {
public:
    parse_error(std::string msg, int line, int col)
        : std::runtime_error(std::move(msg)), line_(line), col_(col) {}
    explicit parse_error(std::string msg)
        : std::runtime_error(std::move(msg)), line_(-1), col_(-1) {}

    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

// Use of an identifier outside the declared variable universe, duplicate
// declarations, witness collisions and similar specification faults.
class declaration_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A construction exceeded a configured resource bound (state count, variable
// count).
class capacity_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Violated internal invariant (corrupt table, singular chain matrix). Not a
// user error.
class internal_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace qshield
