#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wdl/acl.hpp"
#include "wdl/core.hpp"

namespace wdl {

/// Identity of one extensional fact, with the relation that holds it.
struct Token {
    TokenId id = 0;
    RelationKey source;

    auto operator<=>(const Token&) const = default;
};

/// Tokens that jointly witness one derivation, sorted by id, no duplicates.
/// Empty when every contribution was hidden.
using Derivation = std::vector<Token>;

/// Why-provenance: alternative derivations of a fact.
///
/// Alternatives are kept absorption-reduced (no alternative is a superset of
/// another) and sorted lexicographically. At most kMaxAlternatives survive;
/// dropping an alternative only ever removes a read path, never adds one.
struct Provenance {
    static constexpr std::size_t kMaxAlternatives = 64;

    std::vector<Derivation> alternatives;
    bool truncated = false;  // set once the alternative cap has discarded something

    /// The single empty derivation: neutral element of combine.
    static Provenance unit() { return {{Derivation{}}, false}; }

    bool operator==(const Provenance&) const = default;
};

/// Provenance of an extensional fact; the fact must carry a token.
Provenance base_provenance(const Fact& fact);

/// Join: cross product of the alternatives of every body contribution, with
/// hidden contributions replaced by the empty derivation.
Provenance combine(std::span<const std::pair<Provenance, bool>> body);
Provenance combine(const Provenance& a, const Provenance& b);

/// Union of two alternative sets, absorption-reduced.
Provenance merge_alternatives(const Provenance& a, const Provenance& b);

/// Sorts, deduplicates, drops absorbed alternatives and applies the cap.
Provenance reduce(std::vector<Derivation> alternatives, bool truncated = false);

/// `who` reads `fact` iff it reads the container relation and every token of
/// at least one alternative.
bool can_read(const Name& who, const Fact& fact, const Provenance& prov, const AclStore& acl);

/// `{{rel@peer#id,...},...}`
std::string to_string(const Provenance& prov);

}  // namespace wdl
