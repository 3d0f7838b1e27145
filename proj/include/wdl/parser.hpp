#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wdl/acl.hpp"
#include "wdl/core.hpp"

namespace wdl {

/// A parsed scenario. Lists keep source order.
struct Program {
    std::vector<PrincipalId> principals;  // peers and virtual principals
    std::vector<RelationDecl> declarations;
    std::vector<Fact> facts;
    std::vector<Rule> rules;
    std::vector<Grant> grants;

    bool operator==(const Program&) const = default;

    bool is_peer(const Name& name) const;
    bool is_principal(const Name& name) const;
};

/// Declarations of a program plus the reserved `acl@peer` relation of every peer.
DeclTable declarations_of(const Program& program);

/// Parses and validates a scenario.
///
/// Grammar (one directive per line, `#` starts a comment):
///
///     peer NAME
///     principal NAME
///     relation (ext|int) REL@PEER/ARITY [owner PRINCIPAL]
///     fact REL@PEER("c1", ...)
///     rule at PEER [as PRINCIPAL]: HEAD :- ATOM, [hide ATOM], ...
///     grant (read|write|owner) on REL@PEER to PRINCIPAL
///
/// A rule may continue onto the next line after `:-` or `,`.
Program parse_program(std::string_view text);

/// Parses `HEAD :- BODY` hosted and authored by `host`. Checks syntax and
/// safety only; declarations are not consulted.
Rule parse_rule(std::string_view text, const Name& host);

/// Parses a single atom such as `allPhotos@Alice($f)`; used for query patterns.
Atom parse_atom(std::string_view text);

/// Checks every reference, arity and safety constraint of `program`.
void validate(const Program& program);

std::string print_program(const Program& program);

}  // namespace wdl
