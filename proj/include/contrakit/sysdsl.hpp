#pragma once

// =============================================================================
// contrakit - System Definition Files (.sps)
// =============================================================================
// A small line-oriented text format for two-timescale models: [section]
// headers, key = value lines, '#' comments, and an arithmetic expression
// language over x1..xn, z1..zm, u, mu, t with +, -, *, /, ^ and the
// functions sin, cos, tan, atan, exp, abs, sqrt. Every diagnostic carries an
// exact 1-based line:column position. Parsed files compile into the same
// runtime types the built-in examples use, so the two paths are
// interchangeable everywhere downstream.
// =============================================================================

#include "contrakit/contraction.hpp"
#include "contrakit/matrix.hpp"
#include "contrakit/model.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace contrakit::sysdsl {

// -----------------------------------------------------------------------------
// Tokens
// -----------------------------------------------------------------------------

enum class TokenKind {
    number,
    identifier,
    plus,
    minus,
    star,
    slash,
    caret,
    lparen,
    rparen,
    comma,
    end
};

struct Token {
    TokenKind kind = TokenKind::end;
    std::string text;
    double value = 0.0; ///< numeric payload for TokenKind::number
    int line = 1;
    int col = 1;
};

/// Splits one expression into tokens. `line` and `start_col` anchor
/// positions when the text is a slice of a larger file.
[[nodiscard]] std::vector<Token> tokenize(const std::string& text, int line = 1,
                                          int start_col = 1);

// -----------------------------------------------------------------------------
// Expressions
// -----------------------------------------------------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Expression tree node. Power nodes remember whether their exponent is a
/// literal integer or a literal rational p/q so evaluation can use exact
/// integer powers and signed rational roots instead of pow().
struct Expr {
    enum class Kind { number, symbol, negate, call, add, subtract, multiply, divide, power };

    Kind kind = Kind::number;
    double value = 0.0;   ///< Kind::number
    std::string name;     ///< Kind::symbol / Kind::call
    ExprPtr left, right;  ///< operands (negate and call use `left`)

    enum class PowerKind { general, integer, rational };
    PowerKind power_kind = PowerKind::general;
    long long power_num = 0;
    long long power_den = 1;

    int line = 1;
    int col = 1;
};

/// Values an expression may reference.
struct EvalContext {
    StateVector x;
    StateVector z;
    double u = 0.0;
    double mu = 0.0;
    double t = 0.0;
};

/// Operator precedence used by the parser: ^ (40, right-associative) binds
/// tighter than unary minus (30), then * / (20), then + - (10); so
/// "2^3^2" = 512, "-x^2" = -(x^2) and "x^-2" parses.
[[nodiscard]] ExprPtr parse_expression(const std::string& text, int line = 1, int start_col = 1);

/// Evaluates with domain checking; throws EvalError at the offending node.
[[nodiscard]] double evaluate(const ExprPtr& expr, const EvalContext& ctx);

/// Fully parenthesized round-trippable rendering (17 significant digits).
[[nodiscard]] std::string pretty_print(const ExprPtr& expr);

/// Structural equality ignoring source positions.
[[nodiscard]] bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

/// Which symbols an expression slot may use. max_x / max_z of zero forbid
/// that state family entirely.
struct SymbolPolicy {
    std::size_t max_x = 0;
    std::size_t max_z = 0;
    bool allow_u = false;
    bool allow_mu = false;
    bool allow_t = false;
};

/// Validates every symbol node against the policy; throws ParseError at the
/// first offending node.
void validate_symbols(const ExprPtr& expr, const SymbolPolicy& policy,
                      const std::string& slot_name);

// -----------------------------------------------------------------------------
// Files
// -----------------------------------------------------------------------------

/// Parsed .sps file (expressions unevaluated).
struct SystemFile {
    std::string name;
    std::size_t n = 0;
    std::size_t m = 0;
    double mu = 0.0;
    std::vector<ExprPtr> f;     ///< size n
    std::vector<ExprPtr> g;     ///< size m
    ExprPtr u1, u2;             ///< optional control
    std::vector<ExprPtr> z_ds;  ///< optional manifold, size m when present
    std::optional<BoxRegion> slow_region;
    std::optional<BoxRegion> fast_region;
    std::optional<Matrix> theta_slow;
    std::optional<Matrix> theta_fast;
};

[[nodiscard]] SystemFile parse_system_text(const std::string& text);
[[nodiscard]] SystemFile load_system_file(const std::string& path);

/// A file lowered onto the runtime types.
struct CompiledSystem {
    SystemFile file;
    TwoTimescaleSystem system;
    std::optional<ControlLaw> control;  ///< present when both u1 and u2 are
    std::function<double(const StateVector& x)> u1;            ///< empty when absent
    std::function<double(const StateVector&, const StateVector&)> u2;
    std::function<StateVector(const StateVector& x)> manifold; ///< empty when absent
    std::optional<contraction::Metric> metric_slow;
    std::optional<contraction::Metric> metric_fast;
};

[[nodiscard]] CompiledSystem compile(const SystemFile& file);

} // namespace contrakit::sysdsl
