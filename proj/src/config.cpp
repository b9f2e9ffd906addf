#include <cfm/builtins.hpp>
#include <cfm/config.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace cfm {

void Tolerances::validate() const {
    for (double e : {eps1, eps2, eps3, eps4})
        if (!(e > 0.0)) throw ConfigError("tolerances must be positive");
    if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("shrink factor must lie in (0, 1)");
    if (max_outer < 1) throw ConfigError("max_outer must be at least 1");
}

void FemOptions::validate() const {
    if (order < 1 || order > 10) throw ConfigError("element order must lie in [1, 10]");
    if (!(h > 0.0)) throw ConfigError("mesh size h must be positive");
    if (max_h_refinements < 0) throw ConfigError("max_h_refinements must be nonnegative");
    for (const auto& r : rules) {
        try {
            validate_rule(r);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
}

MeshOptions ProblemConfig::mesh_options() const {
    MeshOptions o;
    o.h = fem.h;
    o.rules = fem.rules;
    o.boundary_tol = fem.boundary_tol;
    o.marked_points = marked;
    return o;
}

// ---------------------------------------------------------------------------
// value grammar
// ---------------------------------------------------------------------------

namespace {

constexpr double pi = std::numbers::pi;

struct Value {
    enum class Kind { number, list, call, ident } kind{Kind::number};
    double num{};
    std::string name;
    std::vector<Value> items;

    [[nodiscard]] bool is_number() const { return kind == Kind::number; }
};

class ValueParser {
public:
    explicit ValueParser(std::string_view s) : s_(s) {}

    Value parse_all() {
        Value v = expr();
        skip();
        if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError(what + " at column " + std::to_string(i_ + 1) + " in '" + std::string(s_) + "'");
    }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool eat(char c) {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }
    double need_number(const Value& v) const {
        if (!v.is_number()) fail("expected a number");
        return v.num;
    }

    Value expr() {
        Value v = term();
        for (;;) {
            if (eat('+'))
                v.num = need_number(v) + need_number(term());
            else if (eat('-'))
                v.num = need_number(v) - need_number(term());
            else
                return v;
        }
    }
    Value term() {
        Value v = unary();
        for (;;) {
            if (eat('*'))
                v.num = need_number(v) * need_number(unary());
            else if (eat('/'))
                v.num = need_number(v) / need_number(unary());
            else
                return v;
        }
    }
    Value unary() {
        if (eat('-')) {
            Value v = unary();
            v.num = -need_number(v);
            return v;
        }
        if (eat('+')) return unary();
        Value v = primary();
        if (eat('^')) v.num = std::pow(need_number(v), need_number(unary()));
        return v;
    }
    std::vector<Value> items(char close) {
        std::vector<Value> out;
        if (eat(close)) return out;
        do {
            out.push_back(expr());
        } while (eat(','));
        if (!eat(close)) fail(std::string("expected '") + close + "'");
        return out;
    }
    Value primary() {
        skip();
        if (i_ >= s_.size()) fail("unexpected end of value");
        const char c = s_[i_];
        if (c == '(') {
            ++i_;
            auto v = items(')');
            if (v.size() == 1) return v[0];
            Value out;
            out.kind = Value::Kind::list;
            out.items = std::move(v);
            return out;
        }
        if (c == '[') {
            ++i_;
            Value out;
            out.kind = Value::Kind::list;
            out.items = items(']');
            return out;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.data() + i_;
            char* end = nullptr;
            const double x = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            i_ += static_cast<std::size_t>(end - begin);
            Value out;
            out.num = x;
            return out;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i_;
            while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
            std::string name(s_.substr(i_, j - i_));
            i_ = j;
            if (eat('(')) return call(name, items(')'));
            Value out;
            if (name == "pi") {
                out.num = pi;
            } else if (name == "tau") {
                out.num = 2.0 * pi;
            } else if (name == "e") {
                out.num = std::numbers::e;
            } else {
                out.kind = Value::Kind::ident;
                out.name = std::move(name);
            }
            return out;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
    Value call(const std::string& name, std::vector<Value> args) {
        const bool numeric = std::all_of(args.begin(), args.end(), [](const Value& v) { return v.is_number(); });
        static const std::vector<std::pair<std::string, double (*)(double)>> unary_fns = {
            {"sin", [](double x) { return std::sin(x); }},   {"cos", [](double x) { return std::cos(x); }},
            {"tan", [](double x) { return std::tan(x); }},   {"asin", [](double x) { return std::asin(x); }},
            {"acos", [](double x) { return std::acos(x); }}, {"atan", [](double x) { return std::atan(x); }},
            {"sqrt", [](double x) { return std::sqrt(x); }}, {"exp", [](double x) { return std::exp(x); }},
            {"log", [](double x) { return std::log(x); }},   {"abs", [](double x) { return std::fabs(x); }},
            {"deg", [](double x) { return x * pi / 180.0; }},
        };
        Value out;
        for (const auto& [fn, f] : unary_fns) {
            if (fn != name) continue;
            if (!numeric || args.size() != 1) fail(name + " takes one number");
            out.num = f(args[0].num);
            return out;
        }
        if (name == "atan2" || name == "pow") {
            if (!numeric || args.size() != 2) fail(name + " takes two numbers");
            out.num = name == "pow" ? std::pow(args[0].num, args[1].num) : std::atan2(args[0].num, args[1].num);
            return out;
        }
        out.kind = Value::Kind::call;
        out.name = name;
        out.items = std::move(args);
        return out;
    }

    std::string_view s_;
    std::size_t i_{0};
};

// ---------------------------------------------------------------------------
// interpretation
// ---------------------------------------------------------------------------

double as_number(const Value& v, const std::string& what) {
    if (!v.is_number()) throw ConfigError(what + ": expected a number");
    return v.num;
}

Vec2 as_point(const Value& v, const std::string& what) {
    if (v.kind != Value::Kind::list || v.items.size() != 2) throw ConfigError(what + ": expected a point (x, y)");
    return {as_number(v.items[0], what), as_number(v.items[1], what)};
}

std::vector<double> numbers(const Value& call, std::size_t count) {
    if (call.items.size() != count)
        throw ConfigError(call.name + " takes " + std::to_string(count) + " arguments");
    std::vector<double> out;
    for (const auto& v : call.items) out.push_back(as_number(v, call.name));
    return out;
}

CurveSegment segment(const Value& v) {
    if (v.kind != Value::Kind::call) throw ConfigError("segments(...) expects line/arc/bezier calls");
    if (v.name == "line") {
        const auto a = numbers(v, 4);
        return CurveSegment::line({a[0], a[1]}, {a[2], a[3]});
    }
    if (v.name == "arc") {
        const auto a = numbers(v, 5);
        return CurveSegment::arc({a[0], a[1]}, a[2], a[3], a[4]);
    }
    if (v.name == "bezier") {
        const auto a = numbers(v, 8);
        return CurveSegment::bezier({a[0], a[1]}, {a[2], a[3]}, {a[4], a[5]}, {a[6], a[7]});
    }
    throw ConfigError("unknown segment kind '" + v.name + "'");
}

struct ShapeResult {
    BoundaryLoop loop;
    std::vector<RefinementRule> rules;  // implied by corners and cusps
};

ShapeResult shape(const Value& v) {
    if (v.kind != Value::Kind::call) throw ConfigError("expected a shape such as disk(...)");
    ShapeResult out;
    if (v.name == "disk") {
        const auto a = numbers(v, 3);
        out.loop = disk_loop({a[0], a[1]}, a[2]);
    } else if (v.name == "rect") {
        const auto a = numbers(v, 4);
        out.loop = rect_loop({a[0], a[1]}, {a[2], a[3]});
    } else if (v.name == "pacman") {
        const auto a = numbers(v, 5);
        out.loop = pacman_loop({a[0], a[1]}, a[2], a[3], a[4]);
        for (const Vec2& p : pacman_lips({a[0], a[1]}, a[2], a[3], a[4])) out.rules.push_back({p, 8, 0.15});
    } else if (v.name == "polar") {
        if (v.items.size() != 3) throw ConfigError("polar takes (droplet | [[angle, r], ...], cx, cy)");
        const Vec2 c{as_number(v.items[1], "polar"), as_number(v.items[2], "polar")};
        const Value& src = v.items[0];
        if (src.kind == Value::Kind::ident && src.name == "droplet") {
            out.loop = droplet_loop(c);
            out.rules.push_back({droplet_cusp(c), 12, 0.15});
        } else if (src.kind == Value::Kind::list) {
            std::vector<std::pair<double, double>> samples;
            for (const auto& s : src.items) {
                const Vec2 p = as_point(s, "polar sample");
                samples.emplace_back(p.x, p.y);
            }
            out.loop = polar_table_loop(std::move(samples), c);
        } else {
            throw ConfigError("polar source must be 'droplet' or a sample table");
        }
    } else if (v.name == "segments") {
        for (const auto& s : v.items) out.loop.segments.push_back(segment(s));
    } else {
        throw ConfigError("unknown shape '" + v.name + "'");
    }
    return out;
}

bool as_bool(const std::string& raw) {
    std::string s = raw;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw ConfigError("expected a boolean, got '" + raw + "'");
}

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

int depth_change(std::string_view s) {
    int d = 0;
    for (char c : s) {
        if (c == '(' || c == '[') ++d;
        if (c == ')' || c == ']') --d;
    }
    return d;
}

}  // namespace

double evaluate_expression(std::string_view expr) {
    return as_number(ValueParser(expr).parse_all(), "expression");
}

ProblemConfig parse_config(std::string_view text) {
    ProblemConfig cfg;
    bool have_outer = false, auto_rules = true;
    bool replaced_holes = false, replaced_rules = false;
    std::vector<RefinementRule> implied;
    std::string section;

    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const int start_line = lineno;
        auto strip_comment = [](std::string& l) {
            const auto pos = l.find_first_of("#;");
            if (pos != std::string::npos) l.erase(pos);
        };
        strip_comment(line);
        std::string stmt = trim(line);
        if (stmt.empty()) continue;
        int depth = depth_change(stmt);
        while (depth > 0 && std::getline(in, line)) {
            ++lineno;
            strip_comment(line);
            stmt += ' ' + trim(line);
            depth = depth_change(stmt);
        }
        auto where = [&] { return "line " + std::to_string(start_line) + ": "; };
        if (stmt.front() == '[') {
            if (stmt.back() != ']') throw ConfigError(where() + "malformed section header");
            section = trim(std::string_view(stmt).substr(1, stmt.size() - 2));
            if (section != "domain" && section != "fem" && section != "tolerances")
                throw ConfigError(where() + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = stmt.find('=');
        if (eq == std::string::npos) throw ConfigError(where() + "expected 'key = value'");
        const std::string key = trim(std::string_view(stmt).substr(0, eq));
        const std::string raw = trim(std::string_view(stmt).substr(eq + 1));
        if (section.empty()) throw ConfigError(where() + "key outside of a section");

        try {
            auto value = [&] { return ValueParser(raw).parse_all(); };
            auto number = [&] { return as_number(value(), key); };
            if (section == "domain") {
                if (key == "builtin") {
                    const ProblemConfig b = builtin_problem(raw);
                    cfg = b;
                    have_outer = true;
                } else if (key == "name") {
                    cfg.name = raw;
                } else if (key == "outer") {
                    auto s = shape(value());
                    cfg.domain.outer = std::move(s.loop);
                    implied.insert(implied.end(), s.rules.begin(), s.rules.end());
                    have_outer = true;
                } else if (key == "hole") {
                    if (!replaced_holes) {
                        cfg.domain.holes.clear();
                        replaced_holes = true;
                    }
                    auto s = shape(value());
                    cfg.domain.holes.push_back(std::move(s.loop));
                    implied.insert(implied.end(), s.rules.begin(), s.rules.end());
                } else if (key == "marked") {
                    const Value v = value();
                    if (v.kind != Value::Kind::list) throw ConfigError("marked expects a list of points");
                    cfg.marked.clear();
                    for (const auto& p : v.items) cfg.marked.push_back(as_point(p, "marked"));
                    if (cfg.marked.size() != 4) throw ConfigError("marked expects exactly four points");
                } else if (key == "symmetry_axis") {
                    const Value v = value();
                    if (v.kind != Value::Kind::list || v.items.size() != 2)
                        throw ConfigError("symmetry_axis expects ((x, y), (dx, dy))");
                    cfg.symmetry = SymmetryAxis{as_point(v.items[0], key), as_point(v.items[1], key)};
                } else if (key == "gamma0_start") {
                    cfg.gamma0_start = as_point(value(), key);
                } else if (key == "reference_capacity") {
                    cfg.reference_capacity = number();
                } else {
                    throw ConfigError("unknown key '" + key + "'");
                }
            } else if (section == "fem") {
                if (key == "order") {
                    cfg.fem.order = static_cast<int>(std::lround(number()));
                } else if (key == "h") {
                    cfg.fem.h = number();
                } else if (key == "boundary_tol") {
                    cfg.fem.boundary_tol = number();
                } else if (key == "rule") {
                    if (!replaced_rules) {
                        cfg.fem.rules.clear();
                        replaced_rules = true;
                    }
                    const Value v = value();
                    if (v.kind != Value::Kind::list || v.items.size() != 4)
                        throw ConfigError("rule expects (cx, cy, levels, ratio)");
                    cfg.fem.rules.push_back({{as_number(v.items[0], key), as_number(v.items[1], key)},
                                             static_cast<int>(std::lround(as_number(v.items[2], key))),
                                             as_number(v.items[3], key)});
                } else if (key == "auto_rules") {
                    auto_rules = as_bool(raw);
                } else if (key == "shared_mesh") {
                    cfg.fem.shared_mesh = as_bool(raw);
                } else if (key == "max_h_refinements") {
                    cfg.fem.max_h_refinements = static_cast<int>(std::lround(number()));
                } else {
                    throw ConfigError("unknown key '" + key + "'");
                }
            } else {
                if (key == "eps1")
                    cfg.tol.eps1 = number();
                else if (key == "eps2")
                    cfg.tol.eps2 = number();
                else if (key == "eps3")
                    cfg.tol.eps3 = number();
                else if (key == "eps4")
                    cfg.tol.eps4 = number();
                else if (key == "shrink")
                    cfg.tol.shrink = number();
                else if (key == "max_outer")
                    cfg.tol.max_outer = static_cast<int>(std::lround(number()));
                else
                    throw ConfigError("unknown key '" + key + "'");
            }
        } catch (const ConfigError& e) {
            throw ConfigError(where() + e.what());
        } catch (const GeometryError& e) {
            throw ConfigError(where() + e.what());
        }
    }
    if (!have_outer) throw ConfigError("config has no [domain] outer boundary or builtin");
    if (auto_rules && !replaced_rules) cfg.fem.rules.insert(cfg.fem.rules.end(), implied.begin(), implied.end());
    if (!cfg.marked.empty() && !cfg.domain.holes.empty())
        throw ConfigError("marked points are only meaningful for simply connected domains");
    cfg.tol.validate();
    cfg.fem.validate();
    try {
        cfg.domain = validate_domain(std::move(cfg.domain));
    } catch (const GeometryError& e) {
        throw ConfigError(std::string("invalid domain: ") + e.what());
    }
    if (cfg.name.empty()) cfg.name = "domain";
    return cfg;
}

ProblemConfig load_config(const std::string& source) {
    constexpr std::string_view prefix = "builtin:";
    if (source.rfind(prefix, 0) == 0) {
        ProblemConfig cfg = builtin_problem(std::string_view(source).substr(prefix.size()));
        cfg.tol.validate();
        cfg.fem.validate();
        return cfg;
    }
    std::ifstream f(source);
    if (!f) throw ConfigError("cannot open config '" + source + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    ProblemConfig cfg = parse_config(ss.str());
    return cfg;
}

}  // namespace cfm
