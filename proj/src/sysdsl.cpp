#include "contrakit/sysdsl.hpp"

#include "contrakit/errors.hpp"
#include "contrakit/numerics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace contrakit::sysdsl {

namespace {

constexpr std::array<const char*, 7> kFunctions = {"sin", "cos", "tan", "atan",
                                                   "exp", "abs", "sqrt"};

[[nodiscard]] bool known_function(const std::string& name) {
    return std::find(kFunctions.begin(), kFunctions.end(), name) != kFunctions.end();
}

[[nodiscard]] std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[nodiscard]] ExprPtr make_node(Expr node) { return std::make_shared<const Expr>(std::move(node)); }

} // namespace

// -----------------------------------------------------------------------------
// Tokenizer
// -----------------------------------------------------------------------------

std::vector<Token> tokenize(const std::string& text, int line, int start_col) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        const int col = start_col + static_cast<int>(i);
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = text.data() + i;
            const char* end = text.data() + text.size();
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(begin, end, value);
            if (ec != std::errc() || ptr == begin) {
                throw ParseError("malformed number", line, col);
            }
            tokens.push_back(Token{TokenKind::number, std::string(begin, ptr), value, line, col});
            i += static_cast<std::size_t>(ptr - begin);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) ||
                                       text[j] == '_')) {
                ++j;
            }
            tokens.push_back(
                Token{TokenKind::identifier, text.substr(i, j - i), 0.0, line, col});
            i = j;
            continue;
        }
        TokenKind kind = TokenKind::end;
        switch (c) {
            case '+': kind = TokenKind::plus; break;
            case '-': kind = TokenKind::minus; break;
            case '*': kind = TokenKind::star; break;
            case '/': kind = TokenKind::slash; break;
            case '^': kind = TokenKind::caret; break;
            case '(': kind = TokenKind::lparen; break;
            case ')': kind = TokenKind::rparen; break;
            case ',': kind = TokenKind::comma; break;
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", line, col);
        }
        tokens.push_back(Token{kind, std::string(1, c), 0.0, line, col});
        ++i;
    }
    tokens.push_back(Token{TokenKind::end, "", 0.0, line,
                           start_col + static_cast<int>(text.size())});
    return tokens;
}

// -----------------------------------------------------------------------------
// Parser
// -----------------------------------------------------------------------------

namespace {

/// Literal rational exponents: an integral number, a negated literal, or a
/// quotient of two integral numbers. Returns {numerator, denominator}.
[[nodiscard]] bool literal_rational(const ExprPtr& e, long long* num, long long* den) {
    const auto integral = [](const ExprPtr& x, long long* out) {
        if (x->kind != Expr::Kind::number) return false;
        if (std::floor(x->value) != x->value || std::abs(x->value) > 1e15) return false;
        *out = static_cast<long long>(x->value);
        return true;
    };
    long long v = 0;
    if (integral(e, &v)) {
        *num = v;
        *den = 1;
        return true;
    }
    if (e->kind == Expr::Kind::negate) {
        if (!literal_rational(e->left, num, den)) return false;
        *num = -*num;
        return true;
    }
    if (e->kind == Expr::Kind::divide) {
        long long a = 0, b = 0;
        if (!integral(e->left, &a) || !integral(e->right, &b) || b == 0) return false;
        *num = a;
        *den = b;
        return true;
    }
    return false;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    [[nodiscard]] ExprPtr run() {
        if (peek().kind == TokenKind::end) {
            throw ParseError("empty expression", peek().line, peek().col);
        }
        ExprPtr expr = parse_binary(0);
        if (peek().kind != TokenKind::end) {
            throw ParseError("unexpected token '" + peek().text + "'", peek().line, peek().col);
        }
        return expr;
    }

private:
    [[nodiscard]] const Token& peek() const { return tokens_[pos_]; }
    const Token& advance() { return tokens_[pos_++]; }

    [[nodiscard]] static int precedence(TokenKind kind) {
        switch (kind) {
            case TokenKind::plus:
            case TokenKind::minus: return 10;
            case TokenKind::star:
            case TokenKind::slash: return 20;
            case TokenKind::caret: return 40;
            default: return 0;
        }
    }

    [[nodiscard]] ExprPtr parse_binary(int min_prec) {
        ExprPtr left = parse_unary();
        for (;;) {
            const Token& op = peek();
            const int prec = precedence(op.kind);
            if (prec == 0 || prec < min_prec) break;
            advance();
            // '^' is right-associative; everything else is left-associative.
            const int next_min = (op.kind == TokenKind::caret) ? prec : prec + 1;
            ExprPtr right = parse_binary(next_min);
            left = make_binary(op, std::move(left), std::move(right));
        }
        return left;
    }

    [[nodiscard]] ExprPtr parse_unary() {
        if (peek().kind == TokenKind::minus) {
            const Token op = advance();
            Expr node;
            node.kind = Expr::Kind::negate;
            // Unary minus binds looser than '^': -x^2 == -(x^2).
            node.left = parse_binary(31);
            node.line = op.line;
            node.col = op.col;
            return make_node(std::move(node));
        }
        return parse_primary();
    }

    [[nodiscard]] ExprPtr parse_primary() {
        const Token tok = advance();
        switch (tok.kind) {
            case TokenKind::number: {
                Expr node;
                node.kind = Expr::Kind::number;
                node.value = tok.value;
                node.line = tok.line;
                node.col = tok.col;
                return make_node(std::move(node));
            }
            case TokenKind::identifier: {
                if (peek().kind == TokenKind::lparen) {
                    if (!known_function(tok.text)) {
                        throw ParseError("unknown function '" + tok.text + "'", tok.line, tok.col);
                    }
                    advance(); // '('
                    ExprPtr arg = parse_binary(0);
                    if (peek().kind == TokenKind::comma) {
                        throw ParseError("functions take exactly one argument", peek().line,
                                         peek().col);
                    }
                    if (peek().kind != TokenKind::rparen) {
                        throw ParseError("expected ')'", peek().line, peek().col);
                    }
                    advance();
                    Expr node;
                    node.kind = Expr::Kind::call;
                    node.name = tok.text;
                    node.left = std::move(arg);
                    node.line = tok.line;
                    node.col = tok.col;
                    return make_node(std::move(node));
                }
                Expr node;
                node.kind = Expr::Kind::symbol;
                node.name = tok.text;
                node.line = tok.line;
                node.col = tok.col;
                return make_node(std::move(node));
            }
            case TokenKind::lparen: {
                ExprPtr inner = parse_binary(0);
                if (peek().kind != TokenKind::rparen) {
                    throw ParseError("expected ')'", peek().line, peek().col);
                }
                advance();
                return inner;
            }
            default:
                throw ParseError("unexpected token '" +
                                     (tok.kind == TokenKind::end ? std::string("end of input")
                                                                 : tok.text) +
                                     "'",
                                 tok.line, tok.col);
        }
    }

    [[nodiscard]] static ExprPtr make_binary(const Token& op, ExprPtr left, ExprPtr right) {
        Expr node;
        switch (op.kind) {
            case TokenKind::plus: node.kind = Expr::Kind::add; break;
            case TokenKind::minus: node.kind = Expr::Kind::subtract; break;
            case TokenKind::star: node.kind = Expr::Kind::multiply; break;
            case TokenKind::slash: node.kind = Expr::Kind::divide; break;
            case TokenKind::caret: node.kind = Expr::Kind::power; break;
            default: throw ParseError("internal: bad operator", op.line, op.col);
        }
        node.line = op.line;
        node.col = op.col;
        if (node.kind == Expr::Kind::power) {
            long long num = 0, den = 1;
            if (literal_rational(right, &num, &den)) {
                if (den < 0) {
                    num = -num;
                    den = -den;
                }
                node.power_kind = (den == 1) ? Expr::PowerKind::integer : Expr::PowerKind::rational;
                node.power_num = num;
                node.power_den = den;
            } else {
                node.power_kind = Expr::PowerKind::general;
            }
        }
        node.left = std::move(left);
        node.right = std::move(right);
        return make_node(std::move(node));
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

} // namespace

ExprPtr parse_expression(const std::string& text, int line, int start_col) {
    return Parser(tokenize(text, line, start_col)).run();
}

// -----------------------------------------------------------------------------
// Evaluation
// -----------------------------------------------------------------------------

namespace {

[[nodiscard]] double lookup_symbol(const Expr& node, const EvalContext& ctx) {
    const std::string& name = node.name;
    if (name == "u") return ctx.u;
    if (name == "mu") return ctx.mu;
    if (name == "t") return ctx.t;
    if ((name[0] == 'x' || name[0] == 'z') && name.size() > 1) {
        std::size_t index = 0;
        const auto [ptr, ec] =
            std::from_chars(name.data() + 1, name.data() + name.size(), index);
        if (ec == std::errc() && ptr == name.data() + name.size() && index >= 1) {
            const StateVector& vec = (name[0] == 'x') ? ctx.x : ctx.z;
            if (index > vec.size()) {
                throw EvalError("state index out of range: " + name, node.line, node.col);
            }
            return vec[index - 1];
        }
    }
    throw EvalError("unknown symbol '" + name + "'", node.line, node.col);
}

[[nodiscard]] double apply_function(const Expr& node, double arg) {
    double out = 0.0;
    if (node.name == "sin") out = std::sin(arg);
    else if (node.name == "cos") out = std::cos(arg);
    else if (node.name == "tan") out = std::tan(arg);
    else if (node.name == "atan") out = std::atan(arg);
    else if (node.name == "exp") out = std::exp(arg);
    else if (node.name == "abs") out = std::abs(arg);
    else if (node.name == "sqrt") {
        if (arg < 0.0) {
            throw EvalError("square root of a negative number", node.line, node.col);
        }
        out = std::sqrt(arg);
    } else {
        throw EvalError("unknown function '" + node.name + "'", node.line, node.col);
    }
    if (!std::isfinite(out)) {
        throw EvalError("non-finite result in " + node.name + "()", node.line, node.col);
    }
    return out;
}

} // namespace

double evaluate(const ExprPtr& expr, const EvalContext& ctx) {
    if (!expr) throw InputError("evaluate: empty expression");
    const Expr& e = *expr;
    switch (e.kind) {
        case Expr::Kind::number: return e.value;
        case Expr::Kind::symbol: return lookup_symbol(e, ctx);
        case Expr::Kind::negate: return -evaluate(e.left, ctx);
        case Expr::Kind::call: return apply_function(e, evaluate(e.left, ctx));
        case Expr::Kind::add: return evaluate(e.left, ctx) + evaluate(e.right, ctx);
        case Expr::Kind::subtract: return evaluate(e.left, ctx) - evaluate(e.right, ctx);
        case Expr::Kind::multiply: return evaluate(e.left, ctx) * evaluate(e.right, ctx);
        case Expr::Kind::divide: {
            const double den = evaluate(e.right, ctx);
            if (den == 0.0) throw EvalError("division by zero", e.line, e.col);
            return evaluate(e.left, ctx) / den;
        }
        case Expr::Kind::power: {
            const double base = evaluate(e.left, ctx);
            double out = 0.0;
            if (e.power_kind == Expr::PowerKind::integer) {
                if (base == 0.0 && e.power_num < 0) {
                    throw EvalError("zero raised to a negative power", e.line, e.col);
                }
                out = numerics::ipow(base, e.power_num);
            } else if (e.power_kind == Expr::PowerKind::rational) {
                if (base == 0.0 && e.power_num < 0) {
                    throw EvalError("zero raised to a negative power", e.line, e.col);
                }
                if (base < 0.0 && e.power_den % 2 == 0) {
                    throw EvalError("even root of a negative number", e.line, e.col);
                }
                out = numerics::rpow(base, e.power_num, e.power_den);
            } else {
                out = std::pow(base, evaluate(e.right, ctx));
            }
            if (!std::isfinite(out)) {
                throw EvalError("non-finite result in power", e.line, e.col);
            }
            return out;
        }
    }
    throw InputError("evaluate: corrupt expression node");
}

// -----------------------------------------------------------------------------
// Printing and comparison
// -----------------------------------------------------------------------------

std::string pretty_print(const ExprPtr& expr) {
    if (!expr) throw InputError("pretty_print: empty expression");
    const Expr& e = *expr;
    switch (e.kind) {
        case Expr::Kind::number: {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", e.value);
            return buf;
        }
        case Expr::Kind::symbol: return e.name;
        case Expr::Kind::negate: return "(-" + pretty_print(e.left) + ")";
        case Expr::Kind::call: return e.name + "(" + pretty_print(e.left) + ")";
        case Expr::Kind::add:
            return "(" + pretty_print(e.left) + " + " + pretty_print(e.right) + ")";
        case Expr::Kind::subtract:
            return "(" + pretty_print(e.left) + " - " + pretty_print(e.right) + ")";
        case Expr::Kind::multiply:
            return "(" + pretty_print(e.left) + " * " + pretty_print(e.right) + ")";
        case Expr::Kind::divide:
            return "(" + pretty_print(e.left) + " / " + pretty_print(e.right) + ")";
        case Expr::Kind::power:
            return "(" + pretty_print(e.left) + " ^ " + pretty_print(e.right) + ")";
    }
    throw InputError("pretty_print: corrupt expression node");
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Expr::Kind::number: return a->value == b->value;
        case Expr::Kind::symbol: return a->name == b->name;
        case Expr::Kind::negate: return structurally_equal(a->left, b->left);
        case Expr::Kind::call:
            return a->name == b->name && structurally_equal(a->left, b->left);
        default:
            return structurally_equal(a->left, b->left) &&
                   structurally_equal(a->right, b->right);
    }
}

void validate_symbols(const ExprPtr& expr, const SymbolPolicy& policy,
                      const std::string& slot_name) {
    if (!expr) return;
    const Expr& e = *expr;
    if (e.kind == Expr::Kind::symbol) {
        const std::string& name = e.name;
        const auto reject = [&](const std::string& why) {
            throw ParseError(why + " in " + slot_name, e.line, e.col);
        };
        if (name == "u") {
            if (!policy.allow_u) reject("symbol 'u' is not allowed");
            return;
        }
        if (name == "mu") {
            if (!policy.allow_mu) reject("symbol 'mu' is not allowed");
            return;
        }
        if (name == "t") {
            if (!policy.allow_t) reject("symbol 't' is not allowed");
            return;
        }
        if ((name[0] == 'x' || name[0] == 'z') && name.size() > 1) {
            std::size_t index = 0;
            const auto [ptr, ec] =
                std::from_chars(name.data() + 1, name.data() + name.size(), index);
            if (ec == std::errc() && ptr == name.data() + name.size() && index >= 1) {
                const std::size_t limit = (name[0] == 'x') ? policy.max_x : policy.max_z;
                if (limit == 0) {
                    reject("symbol '" + name + "' is not allowed");
                }
                if (index > limit) {
                    reject("state index out of range: " + name + " (limit " +
                           std::to_string(limit) + ")");
                }
                return;
            }
        }
        reject("unknown symbol '" + name + "'");
    }
    validate_symbols(e.left, policy, slot_name);
    validate_symbols(e.right, policy, slot_name);
}

// -----------------------------------------------------------------------------
// File parsing
// -----------------------------------------------------------------------------

namespace {

constexpr std::array<const char*, 9> kSections = {
    "system",  "dynamics",    "region.slow", "region.fast", "control",
    "manifold", "metric.slow", "metric.fast", ""};

[[nodiscard]] bool known_section(const std::string& name) {
    for (const char* s : kSections) {
        if (!std::string(s).empty() && name == s) return true;
    }
    return false;
}

/// Strict full-string integer parse.
[[nodiscard]] long long parse_integer(const std::string& text, int line, int col) {
    const std::string t = trim(text);
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ParseError("malformed integer '" + t + "'", line, col);
    }
    return value;
}

/// Strict full-string double parse.
[[nodiscard]] double parse_number(const std::string& text, int line, int col) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() ||
        !std::isfinite(value)) {
        throw ParseError("malformed number '" + t + "'", line, col);
    }
    return value;
}

struct AxisSlot {
    bool set = false;
    double lo = 0.0;
    double hi = 0.0;
};

struct FileBuilder {
    SystemFile file;

    bool has_system = false, has_name = false, has_n = false, has_m = false, has_mu = false;
    int system_line = 1;
    bool has_dynamics = false;
    int dynamics_line = 1;
    bool has_region_slow = false, has_region_fast = false;
    int region_slow_line = 1, region_fast_line = 1;
    bool has_manifold = false;
    int manifold_line = 1;

    std::vector<AxisSlot> slow_axes, fast_axes;
    std::set<std::string> seen_keys; // "<section>\n<key>" for duplicate detection

    std::string section;

    void handle_section(const std::string& name, int line) {
        section = name;
        if (name == "system") {
            has_system = true;
            system_line = line;
        } else if (name == "dynamics") {
            require_dims(line);
            has_dynamics = true;
            dynamics_line = line;
            if (file.f.empty()) file.f.resize(file.n);
            if (file.g.empty() && file.m > 0) file.g.resize(file.m);
        } else if (name == "region.slow") {
            require_dims(line);
            has_region_slow = true;
            region_slow_line = line;
            if (slow_axes.empty()) slow_axes.resize(file.n);
        } else if (name == "region.fast") {
            require_dims(line);
            has_region_fast = true;
            region_fast_line = line;
            if (fast_axes.empty() && file.m > 0) fast_axes.resize(file.m);
        } else if (name == "manifold") {
            require_dims(line);
            has_manifold = true;
            manifold_line = line;
            if (file.z_ds.empty() && file.m > 0) file.z_ds.resize(file.m);
        } else if (name == "control" || name == "metric.slow" || name == "metric.fast") {
            require_dims(line);
        }
    }

    void require_dims(int line) const {
        if (!has_n || !has_m) {
            throw ParseError("[system] must declare n and m before this section", line, 1);
        }
    }

    void check_duplicate(const std::string& key, int line, int col) {
        if (!seen_keys.insert(section + "\n" + key).second) {
            throw ParseError("duplicate key '" + key + "'", line, col);
        }
    }

    /// Parses an indexed key like f3 / z2 / zds1 against a prefix; returns
    /// the 1-based index or 0 when the prefix does not match.
    [[nodiscard]] static std::size_t indexed_key(const std::string& key,
                                                 const std::string& prefix) {
        if (key.size() <= prefix.size() || key.compare(0, prefix.size(), prefix) != 0) return 0;
        std::size_t index = 0;
        const char* begin = key.data() + prefix.size();
        const char* end = key.data() + key.size();
        const auto [ptr, ec] = std::from_chars(begin, end, index);
        if (ec != std::errc() || ptr != end || index == 0) return 0;
        return index;
    }

    void handle_pair(const std::string& key, int key_col, const std::string& value,
                     int value_col, int line) {
        if (section.empty()) {
            throw ParseError("key outside any section", line, key_col);
        }
        check_duplicate(key, line, key_col);

        if (section == "system") {
            handle_system(key, key_col, value, value_col, line);
        } else if (section == "dynamics") {
            handle_dynamics(key, key_col, value, value_col, line);
        } else if (section == "region.slow") {
            handle_region(key, key_col, value, value_col, line, true);
        } else if (section == "region.fast") {
            handle_region(key, key_col, value, value_col, line, false);
        } else if (section == "control") {
            handle_control(key, key_col, value, value_col, line);
        } else if (section == "manifold") {
            handle_manifold(key, key_col, value, value_col, line);
        } else if (section == "metric.slow") {
            handle_metric(key, key_col, value, value_col, line, true);
        } else if (section == "metric.fast") {
            handle_metric(key, key_col, value, value_col, line, false);
        }
    }

    void handle_system(const std::string& key, int key_col, const std::string& value,
                       int value_col, int line) {
        if (key == "name") {
            if (value.empty()) throw ParseError("name must not be empty", line, value_col);
            file.name = value;
            has_name = true;
        } else if (key == "n") {
            const long long n = parse_integer(value, line, value_col);
            if (n < 1) throw ParseError("n must be >= 1", line, value_col);
            file.n = static_cast<std::size_t>(n);
            has_n = true;
        } else if (key == "m") {
            const long long m = parse_integer(value, line, value_col);
            if (m < 0) throw ParseError("m must be >= 0", line, value_col);
            file.m = static_cast<std::size_t>(m);
            has_m = true;
        } else if (key == "mu") {
            const double mu = parse_number(value, line, value_col);
            if (mu < 0.0 || mu > 1.0) {
                throw ParseError("mu must lie in [0, 1]", line, value_col);
            }
            file.mu = mu;
            has_mu = true;
        } else {
            throw ParseError("unknown key '" + key + "' in [system]", line, key_col);
        }
    }

    void handle_dynamics(const std::string& key, int key_col, const std::string& value,
                         int value_col, int line) {
        if (const std::size_t i = indexed_key(key, "f"); i != 0) {
            if (i > file.n) {
                throw ParseError("slow index out of range: " + key + " (n = " +
                                     std::to_string(file.n) + ")",
                                 line, key_col);
            }
            ExprPtr expr = parse_expression(value, line, value_col);
            SymbolPolicy policy;
            policy.max_x = file.n;
            policy.max_z = file.m;
            policy.allow_u = true;
            validate_symbols(expr, policy, key);
            file.f[i - 1] = std::move(expr);
            return;
        }
        if (const std::size_t i = indexed_key(key, "g"); i != 0) {
            if (file.m == 0 || i > file.m) {
                throw ParseError("fast index out of range: " + key + " (m = " +
                                     std::to_string(file.m) + ")",
                                 line, key_col);
            }
            ExprPtr expr = parse_expression(value, line, value_col);
            SymbolPolicy policy;
            policy.max_x = file.n;
            policy.max_z = file.m;
            policy.allow_u = true;
            policy.allow_mu = true;
            validate_symbols(expr, policy, key);
            file.g[i - 1] = std::move(expr);
            return;
        }
        throw ParseError("unknown key '" + key + "' in [dynamics]", line, key_col);
    }

    void handle_region(const std::string& key, int key_col, const std::string& value,
                       int value_col, int line, bool slow) {
        const std::size_t i = indexed_key(key, slow ? "x" : "z");
        const std::size_t limit = slow ? file.n : file.m;
        if (i == 0) {
            throw ParseError("unknown key '" + key + "' in [region." +
                                 (slow ? "slow" : "fast") + "]",
                             line, key_col);
        }
        if (limit == 0 || i > limit) {
            throw ParseError("axis out of range: " + key, line, key_col);
        }
        const std::size_t comma = value.find(',');
        if (comma == std::string::npos) {
            throw ParseError("expected 'lo, hi'", line, value_col);
        }
        const std::string lo_text = value.substr(0, comma);
        const std::string hi_text = value.substr(comma + 1);
        const double lo = parse_number(lo_text, line, value_col);
        const double hi =
            parse_number(hi_text, line, value_col + static_cast<int>(comma) + 1);
        if (!(lo <= hi)) {
            throw ParseError("region bounds must satisfy lo <= hi", line, value_col);
        }
        auto& axes = slow ? slow_axes : fast_axes;
        axes[i - 1] = AxisSlot{true, lo, hi};
    }

    void handle_control(const std::string& key, int key_col, const std::string& value,
                        int value_col, int line) {
        SymbolPolicy policy;
        policy.max_x = file.n;
        policy.allow_mu = true;
        if (key == "u1") {
            ExprPtr expr = parse_expression(value, line, value_col);
            validate_symbols(expr, policy, key);
            file.u1 = std::move(expr);
        } else if (key == "u2") {
            policy.max_z = file.m;
            ExprPtr expr = parse_expression(value, line, value_col);
            validate_symbols(expr, policy, key);
            file.u2 = std::move(expr);
        } else {
            throw ParseError("unknown key '" + key + "' in [control]", line, key_col);
        }
    }

    void handle_manifold(const std::string& key, int key_col, const std::string& value,
                         int value_col, int line) {
        const std::size_t i = indexed_key(key, "zds");
        if (i == 0) {
            throw ParseError("unknown key '" + key + "' in [manifold]", line, key_col);
        }
        if (file.m == 0 || i > file.m) {
            throw ParseError("manifold index out of range: " + key, line, key_col);
        }
        ExprPtr expr = parse_expression(value, line, value_col);
        SymbolPolicy policy;
        policy.max_x = file.n;
        policy.allow_mu = true;
        validate_symbols(expr, policy, key);
        file.z_ds[i - 1] = std::move(expr);
    }

    void handle_metric(const std::string& key, int key_col, const std::string& value,
                       int value_col, int line, bool slow) {
        if (key != "theta") {
            throw ParseError("unknown key '" + key + "' in [metric." +
                                 (slow ? "slow" : "fast") + "]",
                             line, key_col);
        }
        const std::size_t dim = slow ? file.n : file.m;
        if (dim == 0) {
            throw ParseError("metric declared for an empty state", line, key_col);
        }

        std::vector<std::vector<double>> rows;
        std::size_t row_start = 0;
        for (;;) {
            const std::size_t semi = value.find(';', row_start);
            const std::string row_text = value.substr(
                row_start, semi == std::string::npos ? std::string::npos : semi - row_start);
            std::vector<double> row;
            std::size_t j = 0;
            while (j < row_text.size()) {
                if (std::isspace(static_cast<unsigned char>(row_text[j]))) {
                    ++j;
                    continue;
                }
                std::size_t k = j;
                while (k < row_text.size() &&
                       !std::isspace(static_cast<unsigned char>(row_text[k]))) {
                    ++k;
                }
                const int entry_col = value_col + static_cast<int>(row_start + j);
                row.push_back(parse_number(row_text.substr(j, k - j), line, entry_col));
                j = k;
            }
            if (row.empty()) {
                throw ParseError("empty metric row", line,
                                 value_col + static_cast<int>(row_start));
            }
            rows.push_back(std::move(row));
            if (semi == std::string::npos) break;
            row_start = semi + 1;
        }
        if (rows.size() != dim) {
            throw ParseError("metric must have " + std::to_string(dim) + " rows", line,
                             value_col);
        }
        Matrix theta(dim, dim);
        for (std::size_t r = 0; r < dim; ++r) {
            if (rows[r].size() != dim) {
                throw ParseError("metric rows must each have " + std::to_string(dim) +
                                     " entries",
                                 line, value_col);
            }
            for (std::size_t c = 0; c < dim; ++c) theta(r, c) = rows[r][c];
        }
        if (slow) {
            file.theta_slow = theta;
        } else {
            file.theta_fast = theta;
        }
    }

    [[nodiscard]] SystemFile finish() {
        if (!has_system) throw ParseError("missing [system] section", 1, 1);
        if (!has_name) throw ParseError("[system] is missing 'name'", system_line, 1);
        if (!has_n) throw ParseError("[system] is missing 'n'", system_line, 1);
        if (!has_m) throw ParseError("[system] is missing 'm'", system_line, 1);
        if (!has_mu) throw ParseError("[system] is missing 'mu'", system_line, 1);
        if (!has_dynamics) throw ParseError("missing [dynamics] section", 1, 1);
        for (std::size_t i = 0; i < file.n; ++i) {
            if (!file.f[i]) {
                throw ParseError("missing f" + std::to_string(i + 1) + " in [dynamics]",
                                 dynamics_line, 1);
            }
        }
        for (std::size_t i = 0; i < file.m; ++i) {
            if (!file.g[i]) {
                throw ParseError("missing g" + std::to_string(i + 1) + " in [dynamics]",
                                 dynamics_line, 1);
            }
        }
        if (!has_region_slow) throw ParseError("missing [region.slow] section", 1, 1);
        StateVector lo(file.n), hi(file.n);
        for (std::size_t i = 0; i < file.n; ++i) {
            if (!slow_axes[i].set) {
                throw ParseError("[region.slow] is missing x" + std::to_string(i + 1),
                                 region_slow_line, 1);
            }
            lo[i] = slow_axes[i].lo;
            hi[i] = slow_axes[i].hi;
        }
        file.slow_region = BoxRegion{lo, hi};
        if (file.m > 0) {
            if (!has_region_fast) throw ParseError("missing [region.fast] section", 1, 1);
            StateVector flo(file.m), fhi(file.m);
            for (std::size_t i = 0; i < file.m; ++i) {
                if (!fast_axes[i].set) {
                    throw ParseError("[region.fast] is missing z" + std::to_string(i + 1),
                                     region_fast_line, 1);
                }
                flo[i] = fast_axes[i].lo;
                fhi[i] = fast_axes[i].hi;
            }
            file.fast_region = BoxRegion{flo, fhi};
        }
        if (has_manifold) {
            for (std::size_t i = 0; i < file.m; ++i) {
                if (!file.z_ds[i]) {
                    throw ParseError("[manifold] is missing zds" + std::to_string(i + 1),
                                     manifold_line, 1);
                }
            }
        }
        return std::move(file);
    }
};

} // namespace

SystemFile parse_system_text(const std::string& text) {
    FileBuilder builder;

    std::istringstream stream(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(stream, raw)) {
        ++line_no;
        // Comments run to end of line; positions refer to the original text.
        std::string logical = raw;
        if (const std::size_t hash = logical.find('#'); hash != std::string::npos) {
            logical = logical.substr(0, hash);
        }
        std::size_t first = 0;
        while (first < logical.size() &&
               std::isspace(static_cast<unsigned char>(logical[first]))) {
            ++first;
        }
        std::size_t last = logical.size();
        while (last > first && std::isspace(static_cast<unsigned char>(logical[last - 1]))) {
            --last;
        }
        if (first == last) continue;

        if (logical[first] == '[') {
            const std::size_t close = logical.find(']', first);
            if (close == std::string::npos) {
                throw ParseError("missing ']' in section header", line_no,
                                 static_cast<int>(last) + 1);
            }
            for (std::size_t j = close + 1; j < last; ++j) {
                if (!std::isspace(static_cast<unsigned char>(logical[j]))) {
                    throw ParseError("unexpected text after section header", line_no,
                                     static_cast<int>(j) + 1);
                }
            }
            const std::string name = logical.substr(first + 1, close - first - 1);
            if (!known_section(name)) {
                throw ParseError("unknown section '" + name + "'", line_no,
                                 static_cast<int>(first) + 2);
            }
            builder.handle_section(name, line_no);
            continue;
        }

        const std::size_t eq = logical.find('=', first);
        if (eq == std::string::npos) {
            throw ParseError("expected 'key = value'", line_no, static_cast<int>(first) + 1);
        }
        const std::string key = trim(logical.substr(first, eq - first));
        if (key.empty()) {
            throw ParseError("missing key before '='", line_no, static_cast<int>(first) + 1);
        }
        std::size_t vfirst = eq + 1;
        while (vfirst < last && std::isspace(static_cast<unsigned char>(logical[vfirst]))) {
            ++vfirst;
        }
        if (vfirst >= last) {
            throw ParseError("missing value after '='", line_no, static_cast<int>(eq) + 2);
        }
        const std::string value = logical.substr(vfirst, last - vfirst);
        builder.handle_pair(key, static_cast<int>(first) + 1, value,
                            static_cast<int>(vfirst) + 1, line_no);
    }
    return builder.finish();
}

SystemFile load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open system file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_system_text(buffer.str());
}

// -----------------------------------------------------------------------------
// Compilation
// -----------------------------------------------------------------------------

CompiledSystem compile(const SystemFile& file) {
    if (!file.slow_region) throw InputError("compile: system file lacks a slow region");
    if (file.m > 0 && !file.fast_region) {
        throw InputError("compile: system file lacks a fast region");
    }

    CompiledSystem cs;
    cs.file = file;

    TwoTimescaleSystem sys;
    sys.n = file.n;
    sys.m = file.m;
    sys.mu = file.mu;
    sys.slow_region = *file.slow_region;
    sys.fast_region = file.m > 0 ? *file.fast_region : BoxRegion{StateVector{}, StateVector{}};

    const auto f_exprs = file.f;
    const std::size_t n = file.n;
    sys.f = [f_exprs, n](const StateVector& x, const StateVector& z, double u) {
        EvalContext ctx;
        ctx.x = x;
        ctx.z = z;
        ctx.u = u;
        StateVector out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = evaluate(f_exprs[i], ctx);
        return out;
    };
    const auto g_exprs = file.g;
    const std::size_t m = file.m;
    sys.g = [g_exprs, m](const StateVector& x, const StateVector& z, double mu, double u) {
        EvalContext ctx;
        ctx.x = x;
        ctx.z = z;
        ctx.u = u;
        ctx.mu = mu;
        StateVector out(m);
        for (std::size_t i = 0; i < m; ++i) out[i] = evaluate(g_exprs[i], ctx);
        return out;
    };
    sys.validate();
    cs.system = sys;

    const double design_mu = file.mu;
    if (file.u1) {
        const auto expr = file.u1;
        cs.u1 = [expr, design_mu](const StateVector& x) {
            EvalContext ctx;
            ctx.x = x;
            ctx.mu = design_mu;
            return evaluate(expr, ctx);
        };
    }
    if (file.u2) {
        const auto expr = file.u2;
        cs.u2 = [expr, design_mu](const StateVector& x, const StateVector& z) {
            EvalContext ctx;
            ctx.x = x;
            ctx.z = z;
            ctx.mu = design_mu;
            return evaluate(expr, ctx);
        };
    }
    if (cs.u1 && cs.u2) {
        ControlLaw law;
        law.u1 = cs.u1;
        law.u2 = cs.u2;
        cs.control = law;
    }
    if (!file.z_ds.empty()) {
        const auto exprs = file.z_ds;
        cs.manifold = [exprs, design_mu](const StateVector& x) {
            EvalContext ctx;
            ctx.x = x;
            ctx.mu = design_mu;
            StateVector out(exprs.size());
            for (std::size_t i = 0; i < exprs.size(); ++i) out[i] = evaluate(exprs[i], ctx);
            return out;
        };
    }
    if (file.theta_slow) cs.metric_slow = contraction::Metric::from_theta(*file.theta_slow);
    if (file.theta_fast) cs.metric_fast = contraction::Metric::from_theta(*file.theta_fast);
    return cs;
}

} // namespace contrakit::sysdsl
