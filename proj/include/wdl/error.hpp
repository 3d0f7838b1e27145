#pragma once

#include <compare>
#include <stdexcept>
#include <string>

namespace wdl {

/// Location in scenario text, 1-based. Zero means "not from source text".
///
/// Positions are diagnostics only: two positions always compare equal so that
/// structural equality of parsed elements ignores where they came from.
struct SourcePos {
    int line = 0;
    int col = 0;

    friend constexpr bool operator==(const SourcePos&, const SourcePos&) { return true; }
    friend constexpr auto operator<=>(const SourcePos&, const SourcePos&) {
        return std::strong_ordering::equal;
    }
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
public:
    SyntaxError(int line, int col, std::string expected, const std::string& found)
        : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(col) +
                ": expected " + expected + ", found " + found),
          line_(line), col_(col), expected_(std::move(expected)) {}

    int line() const { return line_; }
    int col() const { return col_; }
    const std::string& expected() const { return expected_; }

private:
    int line_;
    int col_;
    std::string expected_;
};

/// Semantic rejection of otherwise well-formed input.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what, SourcePos pos = {})
        : Error(what), pos_(pos) {}
    SourcePos pos() const { return pos_; }

private:
    SourcePos pos_;
};

class UnknownPeer : public ValidationError {
public:
    explicit UnknownPeer(const std::string& name, SourcePos pos = {})
        : ValidationError("unknown peer '" + name + "'", pos) {}
};

class UnknownPrincipal : public ValidationError {
public:
    explicit UnknownPrincipal(const std::string& name, SourcePos pos = {})
        : ValidationError("unknown principal '" + name + "'", pos) {}
};

class UnknownRelation : public ValidationError {
public:
    explicit UnknownRelation(const std::string& ref, SourcePos pos = {})
        : ValidationError("unknown relation '" + ref + "'", pos) {}
};

class UnsafeRule : public ValidationError {
public:
    UnsafeRule(const std::string& detail, SourcePos pos = {})
        : ValidationError("unsafe rule: " + detail, pos) {}
};

class ArityMismatch : public ValidationError {
public:
    ArityMismatch(const std::string& ref, std::size_t expected, std::size_t got, SourcePos pos = {})
        : ValidationError("arity mismatch on '" + ref + "': declared " + std::to_string(expected) +
                              ", used with " + std::to_string(got),
                          pos) {}
};

class NotOwner : public Error {
public:
    NotOwner(const std::string& who, const std::string& ref)
        : Error("'" + who + "' does not own '" + ref + "'") {}
};

class CannotRevokeOwner : public Error {
public:
    explicit CannotRevokeOwner(const std::string& ref)
        : Error("the owner grant on '" + ref + "' cannot be revoked") {}
};

class UnboundDelegationTarget : public Error {
public:
    explicit UnboundDelegationTarget(const std::string& atom)
        : Error("peer of '" + atom + "' is not bound by the local prefix") {}
};

}  // namespace wdl
