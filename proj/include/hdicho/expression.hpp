#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace hdicho {

/// Scalar expression in the variable t: numbers, t, + - * / ^, unary minus,
/// parentheses and the functions exp, log, sin, cos.
class Expression {
public:
    struct Node;

    static Expression parse(std::string_view source);

    double operator()(double t) const;
    const std::string& source() const { return source_; }

private:
    Expression(std::string source, std::shared_ptr<const Node> root)
        : source_(std::move(source)), root_(std::move(root)) {}

    std::string source_;
    std::shared_ptr<const Node> root_;
};

}  // namespace hdicho
