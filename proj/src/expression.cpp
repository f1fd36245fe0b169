#include "hdicho/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "hdicho/errors.hpp"

namespace hdicho {

struct Expression::Node {
    enum class Kind { constant, variable, add, sub, mul, div, pow, neg, exp, log, sin, cos };
    Kind kind;
    double value = 0;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(double t) const {
        switch (kind) {
            case Kind::constant: return value;
            case Kind::variable: return t;
            case Kind::add: return lhs->eval(t) + rhs->eval(t);
            case Kind::sub: return lhs->eval(t) - rhs->eval(t);
            case Kind::mul: return lhs->eval(t) * rhs->eval(t);
            case Kind::div: return lhs->eval(t) / rhs->eval(t);
            case Kind::pow: return std::pow(lhs->eval(t), rhs->eval(t));
            case Kind::neg: return -lhs->eval(t);
            case Kind::exp: return std::exp(lhs->eval(t));
            case Kind::log: return std::log(lhs->eval(t));
            case Kind::sin: return std::sin(lhs->eval(t));
            case Kind::cos: return std::cos(lhs->eval(t));
        }
        return 0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double value = 0) {
    auto node = std::make_shared<Expression::Node>();
    node->kind = kind;
    node->lhs = std::move(lhs);
    node->rhs = std::move(rhs);
    node->value = value;
    return node;
}

// expr  := term (('+' | '-') term)*
// term  := unary (('*' | '/') unary)*
// unary := ('-' | '+') unary | power
// power := atom ('^' unary)?
// atom  := number | 't' | func '(' expr ')' | '(' expr ')'
class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse() {
        NodePtr root = expr();
        skip_space();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("expression '" + std::string(src_) + "': " + what + " at column " +
                          std::to_string(pos_ + 1));
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = make(Kind::add, lhs, term());
            else if (accept('-'))
                lhs = make(Kind::sub, lhs, term());
            else
                return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = make(Kind::mul, lhs, unary());
            else if (accept('/'))
                lhs = make(Kind::div, lhs, unary());
            else
                return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Kind::neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        if (accept('^')) return make(Kind::pow, base, unary());
        return base;
    }

    NodePtr atom() {
        skip_space();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
            const std::string_view word = src_.substr(start, pos_ - start);
            if (word == "t") return make(Kind::variable);
            Kind fn;
            if (word == "exp")
                fn = Kind::exp;
            else if (word == "log")
                fn = Kind::log;
            else if (word == "sin")
                fn = Kind::sin;
            else if (word == "cos")
                fn = Kind::cos;
            else {
                pos_ = start;
                fail("unknown identifier '" + std::string(word) + "'");
            }
            if (!accept('(')) fail("expected '(' after function name");
            NodePtr arg = expr();
            if (!accept(')')) fail("expected ')'");
            return make(fn, arg);
        }
        if (accept('(')) {
            NodePtr inner = expr();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        const std::string tail(src_.substr(pos_));
        char* end = nullptr;
        const double value = std::strtod(tail.c_str(), &end);
        if (end == tail.c_str()) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - tail.c_str());
        return make(Kind::constant, nullptr, nullptr, value);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view source) {
    Parser parser(source);
    NodePtr root = parser.parse();
    return Expression(std::string(source), std::move(root));
}

double Expression::operator()(double t) const { return root_->eval(t); }

}  // namespace hdicho
