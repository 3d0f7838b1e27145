#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wdl/error.hpp"

namespace wdl {

using Name = std::string;
using Args = std::vector<std::string>;
using TokenId = std::uint64_t;

enum class PrincipalKind { Peer, Virtual };

struct PrincipalId {
    Name name;
    PrincipalKind kind = PrincipalKind::Peer;

    auto operator<=>(const PrincipalId&) const = default;
};

/// A constant or a `$variable`. Relation and peer positions use the same type;
/// their constants are identifiers.
struct Term {
    enum class Kind { Constant, Variable };

    Kind kind = Kind::Constant;
    std::string text;  // variable names are stored without the leading '$'

    static Term constant(std::string s) { return {Kind::Constant, std::move(s)}; }
    static Term variable(std::string s) { return {Kind::Variable, std::move(s)}; }

    bool is_variable() const { return kind == Kind::Variable; }

    auto operator<=>(const Term&) const = default;
};

/// Ground relation location `relation@peer`.
struct RelationKey {
    Name relation;
    Name peer;

    auto operator<=>(const RelationKey&) const = default;
};

struct RelationRef {
    Term relation;
    Term peer;

    bool ground() const { return !relation.is_variable() && !peer.is_variable(); }
    std::optional<RelationKey> key() const {
        if (!ground()) return std::nullopt;
        return RelationKey{relation.text, peer.text};
    }

    auto operator<=>(const RelationRef&) const = default;
};

enum class RelationKind { Extensional, Intentional };

struct RelationDecl {
    RelationKey ref;
    std::size_t arity = 0;
    RelationKind kind = RelationKind::Extensional;
    Name owner;
    SourcePos pos;

    auto operator<=>(const RelationDecl&) const = default;
};

using DeclTable = std::map<RelationKey, RelationDecl>;

struct FactKey {
    RelationKey ref;
    Args args;

    auto operator<=>(const FactKey&) const = default;
};

struct Fact {
    RelationKey ref;
    Args args;
    std::optional<TokenId> token;  // present iff the fact is extensional and live in a world
    Name author;
    SourcePos pos;

    FactKey key() const { return {ref, args}; }

    auto operator<=>(const Fact&) const = default;
};

struct Atom {
    RelationRef ref;
    std::vector<Term> args;
    bool hidden = false;
    SourcePos pos;

    auto operator<=>(const Atom&) const = default;
};

struct Rule {
    Atom head;
    std::vector<Atom> body;
    Name host;
    Name author;
    std::optional<Name> delegated_by;  // set iff the rule was installed by delegation
    SourcePos pos;

    bool delegated() const { return delegated_by.has_value(); }

    auto operator<=>(const Rule&) const = default;
};

enum class RuleKind { A, B, C, D, E };

/// Variable -> value. Relation, peer and argument variables share one namespace.
using Binding = std::map<std::string, std::string>;

// Names of reserved relations.
inline constexpr const char* kAclRelation = "acl";
inline constexpr std::size_t kAclArity = 3;

/// Variables of an atom, including relation and peer variables.
std::set<std::string> variables_of(const Atom& atom);

/// Throws UnsafeRule unless the body is nonempty, the head is not hidden and
/// every head variable occurs in some body atom.
void check_safety(const Rule& rule);

/// Throws UnknownRelation / ArityMismatch for ground atoms that do not match a
/// declaration.
void check_declared(const Atom& atom, const DeclTable& decls);

RuleKind classify_rule(const Rule& rule, const Name& host, const DeclTable& decls);

Term substitute(const Term& term, const Binding& binding);
Atom substitute(const Atom& atom, const Binding& binding);

std::string quote(const std::string& constant);
std::string to_string(const Term& term);
std::string to_string(const RelationKey& key);
std::string to_string(const RelationRef& ref);
std::string to_string(const FactKey& key);
std::string to_string(const Atom& atom);
/// `head :- body` without host or author.
std::string to_string(const Rule& rule);
const char* to_string(RuleKind kind);
const char* to_string(RelationKind kind);

}  // namespace wdl
