#include "capagg/event.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace capagg {

struct EventExpr::Node {
    Kind kind;
    std::string name;               // Var
    std::shared_ptr<const Node> a;  // Not child / And-Or left
    std::shared_ptr<const Node> b;  // And-Or right
};

EventExpr EventExpr::var(std::string name) {
    if (name.empty()) throw UsageError("variable name must be nonempty");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Var;
    n->name = std::move(name);
    return EventExpr(std::move(n));
}

EventExpr EventExpr::negation(EventExpr child) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Not;
    n->a = std::move(child.node_);
    return EventExpr(std::move(n));
}

EventExpr EventExpr::conjunction(EventExpr left, EventExpr right) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::And;
    n->a = std::move(left.node_);
    n->b = std::move(right.node_);
    return EventExpr(std::move(n));
}

EventExpr EventExpr::disjunction(EventExpr left, EventExpr right) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Or;
    n->a = std::move(left.node_);
    n->b = std::move(right.node_);
    return EventExpr(std::move(n));
}

EventExpr::Kind EventExpr::kind() const { return node_->kind; }

const std::string& EventExpr::name() const { return node_->name; }

EventExpr EventExpr::child() const { return EventExpr(node_->a); }

EventExpr EventExpr::left() const { return EventExpr(node_->a); }

EventExpr EventExpr::right() const { return EventExpr(node_->b); }

namespace {

void collect_support(const EventExpr& e, std::set<std::string>& out) {
    switch (e.kind()) {
    case EventExpr::Kind::Var: out.insert(e.name()); break;
    case EventExpr::Kind::Not: collect_support(e.child(), out); break;
    case EventExpr::Kind::And:
    case EventExpr::Kind::Or:
        collect_support(e.left(), out);
        collect_support(e.right(), out);
        break;
    }
}

// Precedence levels for printing: Or = 0, And = 1, Not = 2, Var = 3.
int precedence(EventExpr::Kind k) {
    switch (k) {
    case EventExpr::Kind::Or: return 0;
    case EventExpr::Kind::And: return 1;
    case EventExpr::Kind::Not: return 2;
    case EventExpr::Kind::Var: return 3;
    }
    return 3;
}

void print(const EventExpr& e, int parent_prec, std::string& out) {
    const int prec = precedence(e.kind());
    const bool parens = prec < parent_prec;
    if (parens) out += '(';
    switch (e.kind()) {
    case EventExpr::Kind::Var:
        out += e.name();
        break;
    case EventExpr::Kind::Not:
        out += '!';
        print(e.child(), prec + 1, out);
        break;
    case EventExpr::Kind::And:
        print(e.left(), prec, out);
        out += " & ";
        print(e.right(), prec + 1, out);
        break;
    case EventExpr::Kind::Or:
        print(e.left(), prec, out);
        out += " | ";
        print(e.right(), prec + 1, out);
        break;
    }
    if (parens) out += ')';
}

} // namespace

std::vector<std::string> EventExpr::support() const {
    std::set<std::string> s;
    collect_support(*this, s);
    return {s.begin(), s.end()};
}

std::string EventExpr::to_string() const {
    std::string out;
    print(*this, 0, out);
    return out;
}

// --- parser -----------------------------------------------------------------

namespace {

struct Token {
    enum class Type { Ident, Not, And, Or, LParen, RParen, End };
    Type type;
    std::string text;
    std::size_t pos;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        const std::size_t start = pos_;
        if (pos_ >= text_.size()) return {Token::Type::End, "", start};
        const char c = text_[pos_];
        if (c == '!') { ++pos_; return {Token::Type::Not, "!", start}; }
        if (c == '&') { ++pos_; return {Token::Type::And, "&", start}; }
        if (c == '|') { ++pos_; return {Token::Type::Or, "|", start}; }
        if (c == '(') { ++pos_; return {Token::Type::LParen, "(", start}; }
        if (c == ')') { ++pos_; return {Token::Type::RParen, ")", start}; }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string word(text_.substr(start, pos_ - start));
            if (word == "not") return {Token::Type::Not, word, start};
            if (word == "and") return {Token::Type::And, word, start};
            if (word == "or") return {Token::Type::Or, word, start};
            return {Token::Type::Ident, std::move(word), start};
        }
        throw ParseError(std::string("unexpected character '") + c + "'", start);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(std::string_view text) : lexer_(text) { advance(); }

    EventExpr parse() {
        EventExpr e = parse_or();
        if (cur_.type != Token::Type::End)
            throw ParseError("unexpected token '" + cur_.text + "'", cur_.pos);
        return e;
    }

private:
    void advance() { cur_ = lexer_.next(); }

    EventExpr parse_or() {
        EventExpr e = parse_and();
        while (cur_.type == Token::Type::Or) {
            advance();
            e = EventExpr::disjunction(std::move(e), parse_and());
        }
        return e;
    }

    EventExpr parse_and() {
        EventExpr e = parse_unary();
        while (cur_.type == Token::Type::And) {
            advance();
            e = EventExpr::conjunction(std::move(e), parse_unary());
        }
        return e;
    }

    EventExpr parse_unary() {
        if (cur_.type == Token::Type::Not) {
            advance();
            return EventExpr::negation(parse_unary());
        }
        if (cur_.type == Token::Type::Ident) {
            EventExpr e = EventExpr::var(cur_.text);
            advance();
            return e;
        }
        if (cur_.type == Token::Type::LParen) {
            const std::size_t open_pos = cur_.pos;
            advance();
            EventExpr e = parse_or();
            if (cur_.type != Token::Type::RParen)
                throw ParseError("unclosed parenthesis opened", open_pos);
            advance();
            return e;
        }
        if (cur_.type == Token::Type::End)
            throw ParseError("unexpected end of input", cur_.pos);
        throw ParseError("expected variable, '!' or '('; got '" + cur_.text + "'", cur_.pos);
    }

    Lexer lexer_;
    Token cur_{Token::Type::End, "", 0};
};

} // namespace

EventExpr parse_event(std::string_view text) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
        throw ParseError("empty event expression", 0);
    return Parser(text).parse();
}

bool evaluate(const EventExpr& e, const TruthAssignment& t) {
    switch (e.kind()) {
    case EventExpr::Kind::Var: {
        auto it = t.find(e.name());
        if (it == t.end())
            throw DataError("assignment missing variable '" + e.name() + "'");
        return it->second;
    }
    case EventExpr::Kind::Not: return !evaluate(e.child(), t);
    case EventExpr::Kind::And: return evaluate(e.left(), t) && evaluate(e.right(), t);
    case EventExpr::Kind::Or: return evaluate(e.left(), t) || evaluate(e.right(), t);
    }
    return false;
}

namespace detail {

CompiledExpr::CompiledExpr(const EventExpr& e, std::span<const std::string> vars) {
    root_ = compile(e, vars);
}

int CompiledExpr::compile(const EventExpr& e, std::span<const std::string> vars) {
    Op op;
    op.kind = e.kind();
    switch (e.kind()) {
    case EventExpr::Kind::Var: {
        auto it = std::find(vars.begin(), vars.end(), e.name());
        if (it == vars.end())
            throw DataError("variable '" + e.name() + "' not in compiled support");
        const std::size_t j = static_cast<std::size_t>(it - vars.begin());
        op.bit = std::uint32_t{1} << (vars.size() - 1 - j);
        break;
    }
    case EventExpr::Kind::Not:
        op.left = compile(e.child(), vars);
        break;
    case EventExpr::Kind::And:
    case EventExpr::Kind::Or:
        op.left = compile(e.left(), vars);
        op.right = compile(e.right(), vars);
        break;
    }
    ops_.push_back(op);
    return static_cast<int>(ops_.size()) - 1;
}

bool CompiledExpr::eval_node(int idx, std::uint32_t mask) const {
    const Op& op = ops_[static_cast<std::size_t>(idx)];
    switch (op.kind) {
    case EventExpr::Kind::Var: return (mask & op.bit) != 0;
    case EventExpr::Kind::Not: return !eval_node(op.left, mask);
    case EventExpr::Kind::And: return eval_node(op.left, mask) && eval_node(op.right, mask);
    case EventExpr::Kind::Or: return eval_node(op.left, mask) || eval_node(op.right, mask);
    }
    return false;
}

} // namespace detail

std::vector<std::string> joint_support(std::span<const EventExpr> events) {
    std::set<std::string> s;
    for (const auto& e : events) collect_support(e, s);
    return {s.begin(), s.end()};
}

std::string canonical_key(const EventExpr& e, std::size_t cap) {
    std::vector<std::string> vars = e.support();
    const std::size_t n = vars.size();
    if (n > cap) throw SupportCapError(n, cap);

    detail::CompiledExpr compiled(e, vars);
    const std::uint32_t count = std::uint32_t{1} << n;
    std::vector<char> table(count);
    for (std::uint32_t mask = 0; mask < count; ++mask)
        table[mask] = compiled.eval(mask) ? '1' : '0';

    // Drop variables whose value never matters, so semantically equal
    // expressions over different syntactic supports compare equal.
    std::vector<bool> relevant(n, false);
    for (std::size_t j = 0; j < n; ++j) {
        const std::uint32_t bit = std::uint32_t{1} << (n - 1 - j);
        for (std::uint32_t mask = 0; mask < count; ++mask) {
            if ((mask & bit) == 0 && table[mask] != table[mask | bit]) {
                relevant[j] = true;
                break;
            }
        }
    }

    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < n; ++j)
        if (relevant[j]) kept.push_back(j);

    std::string key;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (i) key += ',';
        key += vars[kept[i]];
    }
    key += '|';
    const std::uint32_t kept_count = std::uint32_t{1} << kept.size();
    for (std::uint32_t sub = 0; sub < kept_count; ++sub) {
        // Expand the reduced assignment; irrelevant variables read as false.
        std::uint32_t mask = 0;
        for (std::size_t i = 0; i < kept.size(); ++i) {
            const std::uint32_t bit = std::uint32_t{1} << (kept.size() - 1 - i);
            if (sub & bit) mask |= std::uint32_t{1} << (n - 1 - kept[i]);
        }
        key += table[mask];
    }
    return key;
}

std::vector<TruthAssignment> enumerate_support_assignments(
    std::span<const EventExpr> events, std::size_t cap) {
    const std::vector<std::string> vars = joint_support(events);
    const std::size_t n = vars.size();
    if (n > cap) throw SupportCapError(n, cap);

    std::vector<TruthAssignment> out;
    const std::uint64_t count = std::uint64_t{1} << n;
    out.reserve(count);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        TruthAssignment t;
        for (std::size_t j = 0; j < n; ++j)
            t[vars[j]] = (mask >> (n - 1 - j)) & 1;
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace capagg
