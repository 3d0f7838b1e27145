#include "wdl/core.hpp"

#include <sstream>

namespace wdl {

namespace {

void add_var(std::set<std::string>& out, const Term& t) {
    if (t.is_variable()) out.insert(t.text);
}

}  // namespace

std::set<std::string> variables_of(const Atom& atom) {
    std::set<std::string> vars;
    add_var(vars, atom.ref.relation);
    add_var(vars, atom.ref.peer);
    for (const auto& a : atom.args) add_var(vars, a);
    return vars;
}

void check_safety(const Rule& rule) {
    if (rule.body.empty()) throw UnsafeRule("empty body", rule.pos);
    if (rule.head.hidden) throw UnsafeRule("hide is not allowed in the head", rule.head.pos);

    std::set<std::string> bound;
    for (const auto& atom : rule.body) bound.merge(variables_of(atom));
    for (const auto& v : variables_of(rule.head)) {
        if (!bound.contains(v)) {
            throw UnsafeRule("head variable $" + v + " does not occur in the body", rule.head.pos);
        }
    }
}

void check_declared(const Atom& atom, const DeclTable& decls) {
    auto key = atom.ref.key();
    if (!key) return;
    auto it = decls.find(*key);
    if (it == decls.end()) throw UnknownRelation(to_string(*key), atom.pos);
    if (it->second.arity != atom.args.size()) {
        throw ArityMismatch(to_string(*key), it->second.arity, atom.args.size(), atom.pos);
    }
}

RuleKind classify_rule(const Rule& rule, const Name& host, const DeclTable& decls) {
    check_safety(rule);
    check_declared(rule.head, decls);
    for (const auto& atom : rule.body) check_declared(atom, decls);

    for (const auto& atom : rule.body) {
        if (atom.ref.peer.is_variable() || atom.ref.peer.text != host) return RuleKind::E;
    }

    const auto& head = rule.head.ref;
    if (head.peer.is_variable()) return RuleKind::C;
    if (head.relation.is_variable()) {
        // Kind is only known per binding; remote heads default to messaging.
        return head.peer.text == host ? RuleKind::B : RuleKind::C;
    }
    bool intentional = decls.at(*head.key()).kind == RelationKind::Intentional;
    if (head.peer.text == host) return intentional ? RuleKind::A : RuleKind::B;
    return intentional ? RuleKind::D : RuleKind::C;
}

Term substitute(const Term& term, const Binding& binding) {
    if (!term.is_variable()) return term;
    auto it = binding.find(term.text);
    return it == binding.end() ? term : Term::constant(it->second);
}

Atom substitute(const Atom& atom, const Binding& binding) {
    Atom out = atom;
    out.ref.relation = substitute(atom.ref.relation, binding);
    out.ref.peer = substitute(atom.ref.peer, binding);
    for (auto& a : out.args) a = substitute(a, binding);
    return out;
}

std::string quote(const std::string& constant) {
    std::string out = "\"";
    for (char c : constant) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

std::string to_string(const Term& term) {
    return term.is_variable() ? "$" + term.text : term.text;
}

std::string to_string(const RelationKey& key) { return key.relation + "@" + key.peer; }

std::string to_string(const RelationRef& ref) {
    return to_string(ref.relation) + "@" + to_string(ref.peer);
}

std::string to_string(const FactKey& key) {
    std::string out = to_string(key.ref) + "(";
    for (std::size_t i = 0; i < key.args.size(); ++i) {
        if (i) out += ",";
        out += quote(key.args[i]);
    }
    return out + ")";
}

std::string to_string(const Atom& atom) {
    std::string out = to_string(atom.ref) + "(";
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
        if (i) out += ",";
        const auto& a = atom.args[i];
        out += a.is_variable() ? "$" + a.text : quote(a.text);
    }
    out += ")";
    return atom.hidden ? "[hide " + out + "]" : out;
}

std::string to_string(const Rule& rule) {
    std::ostringstream os;
    os << to_string(rule.head) << " :- ";
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
        if (i) os << ", ";
        os << to_string(rule.body[i]);
    }
    return os.str();
}

const char* to_string(RuleKind kind) {
    switch (kind) {
        case RuleKind::A: return "A";
        case RuleKind::B: return "B";
        case RuleKind::C: return "C";
        case RuleKind::D: return "D";
        case RuleKind::E: return "E";
    }
    return "?";
}

const char* to_string(RelationKind kind) {
    return kind == RelationKind::Extensional ? "ext" : "int";
}

}  // namespace wdl
