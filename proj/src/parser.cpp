#include "wdl/parser.hpp"

#include <cctype>
#include <set>
#include <sstream>

namespace wdl {

namespace {

enum class Tok { Ident, Number, Var, String, At, LParen, RParen, Comma, Turnstile, Colon, LBracket, RBracket, Slash, Newline, End };

struct Token {
    Tok kind;
    std::string text;
    SourcePos pos;
};

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::Ident: return "identifier '" + t.text + "'";
        case Tok::Number: return "number " + t.text;
        case Tok::Var: return "variable '$" + t.text + "'";
        case Tok::String: return "string " + quote(t.text);
        case Tok::Newline: return "end of line";
        case Tok::End: return "end of input";
        default: return "'" + t.text + "'";
    }
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_blanks();
            SourcePos pos{line_, col_};
            if (at_end()) {
                out.push_back({Tok::End, "", pos});
                return out;
            }
            char c = peek();
            if (c == '\n') {
                advance();
                out.push_back({Tok::Newline, "\\n", pos});
            } else if (std::isalpha(static_cast<unsigned char>(c))) {
                out.push_back({Tok::Ident, identifier(), pos});
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                std::string digits;
                while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
                    digits += peek();
                    advance();
                }
                out.push_back({Tok::Number, digits, pos});
            } else if (c == '$') {
                advance();
                if (at_end() || !std::isalpha(static_cast<unsigned char>(peek()))) {
                    throw SyntaxError(line_, col_, "variable name", at_end() ? "end of input" : quote(std::string(1, peek())));
                }
                out.push_back({Tok::Var, identifier(), pos});
            } else if (c == '"') {
                out.push_back({Tok::String, string_literal(), pos});
            } else if (c == ':') {
                advance();
                if (!at_end() && peek() == '-') {
                    advance();
                    out.push_back({Tok::Turnstile, ":-", pos});
                } else {
                    out.push_back({Tok::Colon, ":", pos});
                }
            } else {
                Tok kind;
                switch (c) {
                    case '@': kind = Tok::At; break;
                    case '(': kind = Tok::LParen; break;
                    case ')': kind = Tok::RParen; break;
                    case ',': kind = Tok::Comma; break;
                    case '[': kind = Tok::LBracket; break;
                    case ']': kind = Tok::RBracket; break;
                    case '/': kind = Tok::Slash; break;
                    default:
                        throw SyntaxError(line_, col_, "token", quote(std::string(1, c)));
                }
                advance();
                out.push_back({kind, std::string(1, c), pos});
            }
        }
    }

private:
    bool at_end() const { return i_ >= text_.size(); }
    char peek() const { return text_[i_]; }

    void advance() {
        if (text_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }

    void skip_blanks() {
        while (!at_end()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r') {
                advance();
            } else if (c == '#') {
                while (!at_end() && peek() != '\n') advance();
            } else {
                break;
            }
        }
    }

    std::string identifier() {
        std::string out;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
            out += peek();
            advance();
        }
        return out;
    }

    std::string string_literal() {
        advance();  // opening quote
        std::string out;
        while (true) {
            if (at_end() || peek() == '\n') {
                throw SyntaxError(line_, col_, "closing '\"'", at_end() ? "end of input" : "end of line");
            }
            char c = peek();
            if (c == '"') {
                advance();
                return out;
            }
            if (c == '\\') {
                advance();
                if (at_end() || (peek() != '"' && peek() != '\\')) {
                    throw SyntaxError(line_, col_, "'\\\"' or '\\\\' escape",
                                      at_end() ? "end of input" : quote(std::string(1, peek())));
                }
                c = peek();
            }
            out += c;
            advance();
        }
    }

    std::string_view text_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(Lexer(text).run()) {}

    Program program() {
        Program p;
        while (true) {
            skip_newlines();
            if (cur().kind == Tok::End) return p;
            const Token& kw = expect(Tok::Ident, "directive");
            if (kw.text == "peer") {
                p.principals.push_back({expect(Tok::Ident, "peer name").text, PrincipalKind::Peer});
            } else if (kw.text == "principal") {
                p.principals.push_back({expect(Tok::Ident, "principal name").text, PrincipalKind::Virtual});
            } else if (kw.text == "relation") {
                p.declarations.push_back(declaration(kw.pos));
            } else if (kw.text == "fact") {
                p.facts.push_back(fact(kw.pos));
            } else if (kw.text == "rule") {
                p.rules.push_back(rule_directive(kw.pos));
            } else if (kw.text == "grant") {
                p.grants.push_back(grant(kw.pos));
            } else {
                fail("directive (peer, principal, relation, fact, rule, grant)", kw);
            }
            end_of_directive();
        }
    }

    Rule lone_rule(const Name& host) {
        skip_newlines();
        Rule r = rule_body(host, host, cur().pos);
        skip_newlines();
        expect(Tok::End, "end of input");
        return r;
    }

    Atom lone_atom() {
        skip_newlines();
        Atom a = atom(false);
        skip_newlines();
        expect(Tok::End, "end of input");
        return a;
    }

private:
    const Token& cur() const { return toks_[i_]; }

    [[noreturn]] void fail(const std::string& expected, const Token& t) const {
        throw SyntaxError(t.pos.line, t.pos.col, expected, describe(t));
    }

    const Token& expect(Tok kind, const std::string& what) {
        if (cur().kind != kind) fail(what, cur());
        return toks_[i_++];
    }

    void keyword(const std::string& kw) {
        if (cur().kind != Tok::Ident || cur().text != kw) fail("'" + kw + "'", cur());
        ++i_;
    }

    bool accept(Tok kind) {
        if (cur().kind != kind) return false;
        ++i_;
        return true;
    }

    void skip_newlines() {
        while (cur().kind == Tok::Newline) ++i_;
    }

    void end_of_directive() {
        if (cur().kind == Tok::End) return;
        expect(Tok::Newline, "end of line");
    }

    RelationKey ground_ref() {
        Name rel = expect(Tok::Ident, "relation name").text;
        expect(Tok::At, "'@'");
        Name peer = expect(Tok::Ident, "peer name").text;
        return {rel, peer};
    }

    RelationDecl declaration(SourcePos pos) {
        RelationDecl d;
        d.pos = pos;
        const Token& kind = expect(Tok::Ident, "'ext' or 'int'");
        if (kind.text == "ext") {
            d.kind = RelationKind::Extensional;
        } else if (kind.text == "int") {
            d.kind = RelationKind::Intentional;
        } else {
            fail("'ext' or 'int'", kind);
        }
        d.ref = ground_ref();
        expect(Tok::Slash, "'/'");
        const Token& arity = expect(Tok::Number, "arity");
        if (arity.text.size() > 6) fail("arity below 1000000", arity);
        d.arity = std::stoul(arity.text);
        d.owner = d.ref.peer;
        if (cur().kind == Tok::Ident && cur().text == "owner") {
            ++i_;
            d.owner = expect(Tok::Ident, "owner principal").text;
        }
        return d;
    }

    Fact fact(SourcePos pos) {
        Fact f;
        f.pos = pos;
        f.ref = ground_ref();
        expect(Tok::LParen, "'('");
        if (!accept(Tok::RParen)) {
            do {
                f.args.push_back(expect(Tok::String, "string constant").text);
            } while (accept(Tok::Comma));
            expect(Tok::RParen, "')' or ','");
        }
        f.author = f.ref.peer;
        return f;
    }

    Rule rule_directive(SourcePos pos) {
        keyword("at");
        Name host = expect(Tok::Ident, "host peer").text;
        Name author = host;
        if (cur().kind == Tok::Ident && cur().text == "as") {
            ++i_;
            author = expect(Tok::Ident, "author principal").text;
        }
        expect(Tok::Colon, "':'");
        return rule_body(host, author, pos);
    }

    Rule rule_body(const Name& host, const Name& author, SourcePos pos) {
        Rule r;
        r.pos = pos;
        r.host = host;
        r.author = author;
        if (cur().kind == Tok::LBracket) fail("head atom (hide is only allowed in the body)", cur());
        r.head = atom(false);
        expect(Tok::Turnstile, "':-'");
        do {
            skip_newlines();
            r.body.push_back(atom(true));
        } while (accept(Tok::Comma));
        check_safety(r);
        return r;
    }

    Term name_term(const std::string& what) {
        if (cur().kind == Tok::Var) return Term::variable(toks_[i_++].text);
        return Term::constant(expect(Tok::Ident, what).text);
    }

    Atom atom(bool allow_hide) {
        Atom a;
        a.pos = cur().pos;
        bool bracketed = allow_hide && accept(Tok::LBracket);
        if (bracketed) {
            keyword("hide");
            a.hidden = true;
        }
        a.ref.relation = name_term("relation name or variable");
        expect(Tok::At, "'@'");
        a.ref.peer = name_term("peer name or variable");
        expect(Tok::LParen, "'('");
        if (!accept(Tok::RParen)) {
            do {
                if (cur().kind == Tok::Var) {
                    a.args.push_back(Term::variable(toks_[i_++].text));
                } else {
                    a.args.push_back(Term::constant(expect(Tok::String, "variable or string constant").text));
                }
            } while (accept(Tok::Comma));
            expect(Tok::RParen, "')' or ','");
        }
        if (bracketed) expect(Tok::RBracket, "']'");
        return a;
    }

    Grant grant(SourcePos pos) {
        Grant g;
        g.pos = pos;
        const Token& priv = expect(Tok::Ident, "privilege (read, write, owner)");
        auto p = parse_privilege(priv.text);
        if (!p) fail("privilege (read, write, owner)", priv);
        g.privilege = *p;
        keyword("on");
        g.target = ground_ref();
        keyword("to");
        g.grantee = expect(Tok::Ident, "grantee").text;
        return g;
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

}  // namespace

bool Program::is_peer(const Name& name) const {
    for (const auto& p : principals) {
        if (p.name == name) return p.kind == PrincipalKind::Peer;
    }
    return false;
}

bool Program::is_principal(const Name& name) const {
    for (const auto& p : principals) {
        if (p.name == name) return true;
    }
    return false;
}

DeclTable declarations_of(const Program& program) {
    DeclTable table;
    for (const auto& d : program.declarations) table.emplace(d.ref, d);
    for (const auto& p : program.principals) {
        if (p.kind != PrincipalKind::Peer) continue;
        RelationKey key{kAclRelation, p.name};
        table.emplace(key, RelationDecl{key, kAclArity, RelationKind::Extensional, p.name, {}});
    }
    return table;
}

namespace {

void check_atom_peers(const Atom& atom, const Program& program) {
    if (!atom.ref.peer.is_variable() && !program.is_peer(atom.ref.peer.text)) {
        throw UnknownPeer(atom.ref.peer.text, atom.pos);
    }
}

}  // namespace

void validate(const Program& program) {
    std::set<Name> names;
    for (const auto& p : program.principals) {
        if (!names.insert(p.name).second) {
            throw ValidationError("principal '" + p.name + "' declared twice");
        }
    }

    std::set<RelationKey> seen;
    for (const auto& d : program.declarations) {
        if (!program.is_peer(d.ref.peer)) throw UnknownPeer(d.ref.peer, d.pos);
        if (!program.is_principal(d.owner)) throw UnknownPrincipal(d.owner, d.pos);
        if (d.ref.relation == kAclRelation) {
            throw ValidationError("relation name 'acl' is reserved", d.pos);
        }
        if (!seen.insert(d.ref).second) {
            throw ValidationError("relation '" + to_string(d.ref) + "' declared twice", d.pos);
        }
    }

    const DeclTable decls = declarations_of(program);

    for (const auto& f : program.facts) {
        if (!program.is_peer(f.ref.peer)) throw UnknownPeer(f.ref.peer, f.pos);
        auto it = decls.find(f.ref);
        if (it == decls.end()) throw UnknownRelation(to_string(f.ref), f.pos);
        if (f.ref.relation == kAclRelation) {
            throw ValidationError("acl facts are managed through grant directives", f.pos);
        }
        if (it->second.kind != RelationKind::Extensional) {
            throw ValidationError("fact targets intentional relation '" + to_string(f.ref) + "'", f.pos);
        }
        if (it->second.arity != f.args.size()) {
            throw ArityMismatch(to_string(f.ref), it->second.arity, f.args.size(), f.pos);
        }
    }

    for (const auto& r : program.rules) {
        if (!program.is_peer(r.host)) throw UnknownPeer(r.host, r.pos);
        if (!program.is_principal(r.author)) throw UnknownPrincipal(r.author, r.pos);
        check_safety(r);
        check_atom_peers(r.head, program);
        for (const auto& a : r.body) check_atom_peers(a, program);
        check_declared(r.head, decls);
        for (const auto& a : r.body) check_declared(a, decls);
        if (!r.head.ref.relation.is_variable() && r.head.ref.relation.text == kAclRelation) {
            throw ValidationError("rules cannot write acl relations", r.head.pos);
        }
    }

    for (const auto& g : program.grants) {
        if (!program.is_peer(g.target.peer)) throw UnknownPeer(g.target.peer, g.pos);
        if (!decls.contains(g.target) || g.target.relation == kAclRelation) {
            throw UnknownRelation(to_string(g.target), g.pos);
        }
        if (!program.is_principal(g.grantee)) throw UnknownPrincipal(g.grantee, g.pos);
    }
}

Program parse_program(std::string_view text) {
    Program p = Parser(text).program();
    validate(p);
    return p;
}

Rule parse_rule(std::string_view text, const Name& host) { return Parser(text).lone_rule(host); }

Atom parse_atom(std::string_view text) { return Parser(text).lone_atom(); }

std::string print_program(const Program& program) {
    std::ostringstream os;
    for (const auto& p : program.principals) {
        os << (p.kind == PrincipalKind::Peer ? "peer " : "principal ") << p.name << '\n';
    }
    for (const auto& d : program.declarations) {
        os << "relation " << to_string(d.kind) << ' ' << to_string(d.ref) << '/' << d.arity << " owner "
           << d.owner << '\n';
    }
    for (const auto& f : program.facts) os << "fact " << to_string(f.key()) << '\n';
    for (const auto& r : program.rules) {
        os << "rule at " << r.host;
        if (r.author != r.host) os << " as " << r.author;
        os << ": " << to_string(r) << '\n';
    }
    for (const auto& g : program.grants) {
        os << "grant " << to_string(g.privilege) << " on " << to_string(g.target) << " to " << g.grantee << '\n';
    }
    return os.str();
}

}  // namespace wdl
