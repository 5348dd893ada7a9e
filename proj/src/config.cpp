#include "parcap/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace parcap {

namespace {

struct Value {
    enum class Kind { Number, String, Bool, NumberArray, StringArray } kind;
    double num = 0;
    std::string str;
    bool boolean = false;
    std::vector<double> nums;
    std::vector<std::string> strs;
    int line = 0;
};

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

bool parse_number(const std::string& s, double& out) {
    try {
        size_t used = 0;
        out = std::stod(s, &used);
        return used == s.size();
    } catch (...) {
        return false;
    }
}

// one parsed key = value entry
bool parse_value(const std::string& raw, Value& v, std::string& err) {
    const std::string s = trim(raw);
    if (s.empty()) {
        err = "empty value";
        return false;
    }
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') {
            err = "unterminated string";
            return false;
        }
        v.kind = Value::Kind::String;
        v.str = s.substr(1, s.size() - 2);
        return true;
    }
    if (s == "true" || s == "false") {
        v.kind = Value::Kind::Bool;
        v.boolean = s == "true";
        return true;
    }
    if (s.front() == '[') {
        if (s.back() != ']') {
            err = "unterminated array";
            return false;
        }
        std::string body = s.substr(1, s.size() - 2);
        std::vector<std::string> items;
        std::string cur;
        for (char c : body) {
            if (c == ',') {
                items.push_back(trim(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!trim(cur).empty()) items.push_back(trim(cur));
        bool all_nums = true;
        for (auto& it : items)
            if (!it.empty() && it.front() == '"') all_nums = false;
        if (all_nums) {
            v.kind = Value::Kind::NumberArray;
            for (auto& it : items) {
                double d;
                if (!parse_number(it, d)) {
                    err = "bad number in array: '" + it + "'";
                    return false;
                }
                v.nums.push_back(d);
            }
        } else {
            v.kind = Value::Kind::StringArray;
            for (auto& it : items) {
                if (it.size() < 2 || it.front() != '"' || it.back() != '"') {
                    err = "bad string in array: '" + it + "'";
                    return false;
                }
                v.strs.push_back(it.substr(1, it.size() - 2));
            }
        }
        return true;
    }
    double d;
    if (parse_number(s, d)) {
        v.kind = Value::Kind::Number;
        v.num = d;
        v.str = s;  // kept verbatim for exactness checks (p rationality)
        return true;
    }
    err = "unrecognized value '" + s + "'";
    return false;
}

using Section = std::map<std::string, Value>;

struct Document {
    std::map<std::string, Section> sections;  // "" = top level
};

void parse_document(const std::string& text, Document& doc, std::vector<std::string>& errors) {
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            doc.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        Value v;
        std::string err;
        if (!parse_value(line.substr(eq + 1), v, err)) {
            errors.push_back("line " + std::to_string(lineno) + ": " + err);
            continue;
        }
        v.line = lineno;
        auto& sec = doc.sections[section];
        if (sec.count(key))
            errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        sec[key] = v;
    }
}

// typed getters recording errors and consumed keys
struct SectionReader {
    const Section* sec;
    std::string name;
    std::vector<std::string>* errors;
    std::set<std::string> consumed;

    bool has(const std::string& key) const { return sec && sec->count(key); }

    const Value* get(const std::string& key) {
        consumed.insert(key);
        if (!sec) return nullptr;
        auto it = sec->find(key);
        return it == sec->end() ? nullptr : &it->second;
    }
    void err(const std::string& m) { errors->push_back("[" + name + "] " + m); }

    double number(const std::string& key, double dflt) {
        const Value* v = get(key);
        if (!v) return dflt;
        if (v->kind != Value::Kind::Number) {
            err(key + " must be a number");
            return dflt;
        }
        return v->num;
    }
    long integer(const std::string& key, long dflt) {
        const Value* v = get(key);
        if (!v) return dflt;
        if (v->kind != Value::Kind::Number || v->num != std::floor(v->num)) {
            err(key + " must be an integer");
            return dflt;
        }
        return static_cast<long>(v->num);
    }
    bool boolean(const std::string& key, bool dflt) {
        const Value* v = get(key);
        if (!v) return dflt;
        if (v->kind != Value::Kind::Bool) {
            err(key + " must be true or false");
            return dflt;
        }
        return v->boolean;
    }
    std::string str(const std::string& key, const std::string& dflt) {
        const Value* v = get(key);
        if (!v) return dflt;
        if (v->kind != Value::Kind::String) {
            err(key + " must be a string");
            return dflt;
        }
        return v->str;
    }
    std::vector<double> numbers(const std::string& key, std::vector<double> dflt) {
        const Value* v = get(key);
        if (!v) return dflt;
        if (v->kind == Value::Kind::NumberArray) return v->nums;
        if (v->kind == Value::Kind::Number) return {v->num};
        err(key + " must be a number array");
        return dflt;
    }
    std::vector<std::string> strings(const std::string& key, std::vector<std::string> dflt) {
        const Value* v = get(key);
        if (!v) return dflt;
        if (v->kind == Value::Kind::StringArray) return v->strs;
        if (v->kind == Value::Kind::String) return {v->str};
        err(key + " must be a string array");
        return dflt;
    }
    void finish() {
        if (!sec) return;
        for (const auto& [key, v] : *sec)
            if (!consumed.count(key))
                errors->push_back("[" + name + "] unknown key '" + key + "' (line " +
                                  std::to_string(v.line) + ")");
    }
};

Rational parse_p(SectionReader& r, std::vector<std::string>& errors) {
    const Value* v = r.get("p");
    if (!v) return Rational(3, 1);
    std::string text;
    if (v->kind == Value::Kind::String) {
        text = v->str;
    } else if (v->kind == Value::Kind::Number) {
        if (v->num != std::floor(v->num)) {
            errors.push_back("[grid] p must be rational k/l");
            return Rational(3, 1);
        }
        text = v->str;
    } else {
        errors.push_back("[grid] p must be rational k/l");
        return Rational(3, 1);
    }
    try {
        Rational p = parse_rational(text);
        if (!(p.value() > 2.0)) {
            errors.push_back("[grid] p must exceed 2");
            return Rational(3, 1);
        }
        if (p.num > 9 || p.den > 3) {
            errors.push_back("[grid] p must be rational k/l with k <= 9, l <= 3");
            return Rational(3, 1);
        }
        return p;
    } catch (const Error&) {
        errors.push_back("[grid] p must be rational k/l");
        return Rational(3, 1);
    }
}

}  // namespace

GridSpec RunConfig::grid() const {
    std::array<double, 2> ex = {extent.empty() ? 1.0 : extent[0],
                                extent.size() > 1 ? extent[1] : 1.0};
    return GridSpec::make(n, ex, h, tau, T, p);
}

Shape RunConfig::shape(const std::string& name) const {
    std::set<std::string> visiting;
    std::function<Shape(const std::string&)> build = [&](const std::string& nm) -> Shape {
        auto it = sets.find(nm);
        if (it == sets.end()) throw InvalidArgument("unknown set '" + nm + "'");
        if (!visiting.insert(nm).second)
            throw InvalidArgument("set union cycle through '" + nm + "'");
        const SetDef& d = it->second;
        Shape s;
        auto point = [&](const std::vector<double>& c) {
            SpaceTimePoint z;
            if (static_cast<int>(c.size()) != n + 1)
                throw InvalidArgument("set '" + nm + "': center needs " + std::to_string(n + 1) +
                                      " coordinates");
            z.x[0] = c[0];
            if (n == 2) z.x[1] = c[1];
            z.t = c.back();
            return z;
        };
        if (d.kind == "cylinder") {
            ParabolicCylinder cyl;
            cyl.center = point(d.center);
            cyl.r = d.radius;
            cyl.variant = d.variant == "lower-half" ? CylinderVariant::LowerHalf
                                                    : CylinderVariant::Full;
            s.v = cyl;
        } else if (d.kind == "box") {
            BoxShape b;
            b.center = point(d.center);
            if (static_cast<int>(d.extent.size()) != n + 1)
                throw InvalidArgument("set '" + nm + "': extent needs " + std::to_string(n + 1) +
                                      " entries");
            b.xext[0] = d.extent[0];
            if (n == 2) b.xext[1] = d.extent[1];
            b.text = d.extent.back();
            s.v = b;
        } else if (d.kind == "disc") {
            DiscShape ds;
            ds.center = point(d.center);
            ds.r = d.radius;
            s.v = ds;
        } else if (d.kind == "dyadic-fractal") {
            DustShape dust;
            dust.center = point(d.center);
            dust.r0 = d.r0;
            dust.dimension = d.dimension;
            dust.generations = d.generations;
            dust.seed = d.seed;
            s.v = dust;
        } else if (d.kind == "union") {
            UnionShape u;
            for (const auto& m : d.members) u.members.push_back(build(m));
            s.v = u;
        } else {
            throw InvalidArgument("set '" + nm + "': unknown kind '" + d.kind + "'");
        }
        visiting.erase(nm);
        return s;
    };
    return build(name);
}

PointSet RunConfig::rasterized(const std::string& name) const {
    return rasterize(shape(name), grid());
}

ParseResult parse_config(const std::string& text) {
    ParseResult out;
    Document doc;
    parse_document(text, doc, out.errors);
    RunConfig cfg;

    auto reader = [&](const std::string& name) {
        SectionReader r;
        auto it = doc.sections.find(name);
        r.sec = it == doc.sections.end() ? nullptr : &it->second;
        r.name = name.empty() ? "top-level" : name;
        r.errors = &out.errors;
        return r;
    };

    {
        SectionReader r = reader("");
        r.finish();  // no top-level keys allowed
    }
    {
        SectionReader r = reader("grid");
        cfg.n = static_cast<int>(r.integer("n", 1));
        if (cfg.n != 1 && cfg.n != 2) r.err("n must be 1 or 2");
        cfg.p = parse_p(r, out.errors);
        cfg.h = r.number("h", 1.0 / 64);
        cfg.tau = r.number("tau", 1.0 / 256);
        cfg.T = r.number("T", 1.0);
        cfg.extent = r.numbers("extent", {1.0});
        r.finish();
    }
    {
        SectionReader r = reader("solver");
        cfg.solver.eps = r.number("eps", -1.0);
        cfg.solver.newton_tol = r.number("newton_tol", 1e-9);
        cfg.solver.max_iter = static_cast<int>(r.integer("max_iter", 50));
        cfg.solver.damping = r.number("damping", 0.5);
        cfg.solver.m_cap = r.number("m_cap", 1e6);
        cfg.solver.contact_tol_factor = r.number("contact_tol_factor", 10.0);
        r.finish();
        try {
            cfg.solver.validate();
        } catch (const Error& e) {
            out.errors.push_back(std::string("[solver] ") + e.what());
        }
    }
    {
        SectionReader r = reader("run");
        cfg.out_dir = r.str("out", "parcap-out");
        cfg.threads = static_cast<int>(r.integer("threads", 1));
        cfg.seed = static_cast<std::uint64_t>(r.integer("seed", 1));
        cfg.cache_dir = r.str("cache", "");
        cfg.force = r.boolean("force", false);
        if (cfg.threads < 1) r.err("threads must be >= 1");
        r.finish();
    }
    {
        SectionReader r = reader("measure");
        cfg.measure.kind = r.str("kind", "dirac");
        cfg.measure.point = r.numbers("point", {});
        cfg.measure.mass = r.number("mass", 1.0);
        cfg.measure.set = r.str("set", "");
        if (cfg.measure.kind != "dirac" && cfg.measure.kind != "uniform")
            r.err("kind must be dirac or uniform");
        r.finish();
    }
    {
        SectionReader r = reader("experiments");
        cfg.experiments = r.strings("run", {});
        r.finish();
    }
    for (const auto& [name, sec] : doc.sections) {
        if (name.rfind("set.", 0) != 0) continue;
        const std::string set_name = name.substr(4);
        SectionReader r = reader(name);
        SetDef d;
        d.kind = r.str("kind", "");
        d.center = r.numbers("center", {});
        d.radius = r.number("radius", 0.0);
        d.variant = r.str("variant", "full");
        d.extent = r.numbers("extent", {});
        d.members = r.strings("members", {});
        d.dimension = r.number("dimension", 0.5);
        d.generations = static_cast<int>(r.integer("generations", 2));
        d.r0 = r.number("r0", 0.25);
        d.seed = static_cast<std::uint64_t>(r.integer("seed", 0));
        static const std::set<std::string> kinds = {"cylinder", "box", "disc", "union",
                                                    "dyadic-fractal"};
        if (!kinds.count(d.kind))
            r.err("kind must be cylinder | box | disc | union | dyadic-fractal");
        if (d.kind == "union" && d.members.empty()) r.err("union needs members");
        r.finish();
        cfg.sets[set_name] = d;
    }
    for (const auto& [name, sec] : doc.sections) {
        static const std::set<std::string> known = {"", "grid", "solver", "run", "measure",
                                                    "experiments"};
        if (!known.count(name) && name.rfind("set.", 0) != 0)
            out.errors.push_back("unknown section [" + name + "]");
    }

    // grid must actually construct
    if (out.errors.empty()) {
        try {
            cfg.grid();
        } catch (const Error& e) {
            out.errors.push_back(std::string("[grid] ") + e.what());
        }
    }
    if (out.errors.empty()) out.config = cfg;
    return out;
}

std::string emit_config(const RunConfig& c) {
    std::ostringstream os;
    os << "[grid]\n";
    os << "n = " << c.n << "\n";
    os << "p = \"" << c.p.num << "/" << c.p.den << "\"\n";
    os << "h = " << format_double(c.h) << "\n";
    os << "tau = " << format_double(c.tau) << "\n";
    os << "T = " << format_double(c.T) << "\n";
    os << "extent = [";
    for (size_t i = 0; i < c.extent.size(); ++i)
        os << (i ? ", " : "") << format_double(c.extent[i]);
    os << "]\n\n";

    os << "[solver]\n";
    os << "eps = " << format_double(c.solver.eps) << "\n";
    os << "newton_tol = " << format_double(c.solver.newton_tol) << "\n";
    os << "max_iter = " << c.solver.max_iter << "\n";
    os << "damping = " << format_double(c.solver.damping) << "\n";
    os << "m_cap = " << format_double(c.solver.m_cap) << "\n";
    os << "contact_tol_factor = " << format_double(c.solver.contact_tol_factor) << "\n\n";

    os << "[run]\n";
    os << "out = \"" << c.out_dir << "\"\n";
    os << "threads = " << c.threads << "\n";
    os << "seed = " << c.seed << "\n";
    os << "cache = \"" << c.cache_dir << "\"\n";
    os << "force = " << (c.force ? "true" : "false") << "\n\n";

    os << "[measure]\n";
    os << "kind = \"" << c.measure.kind << "\"\n";
    if (!c.measure.point.empty()) {
        os << "point = [";
        for (size_t i = 0; i < c.measure.point.size(); ++i)
            os << (i ? ", " : "") << format_double(c.measure.point[i]);
        os << "]\n";
    }
    os << "mass = " << format_double(c.measure.mass) << "\n";
    if (!c.measure.set.empty()) os << "set = \"" << c.measure.set << "\"\n";
    os << "\n";

    if (!c.experiments.empty()) {
        os << "[experiments]\n";
        os << "run = [";
        for (size_t i = 0; i < c.experiments.size(); ++i)
            os << (i ? ", " : "") << "\"" << c.experiments[i] << "\"";
        os << "]\n\n";
    }

    for (const auto& [name, d] : c.sets) {
        os << "[set." << name << "]\n";
        os << "kind = \"" << d.kind << "\"\n";
        if (!d.center.empty()) {
            os << "center = [";
            for (size_t i = 0; i < d.center.size(); ++i)
                os << (i ? ", " : "") << format_double(d.center[i]);
            os << "]\n";
        }
        if (d.kind == "cylinder" || d.kind == "disc")
            os << "radius = " << format_double(d.radius) << "\n";
        if (d.kind == "cylinder") os << "variant = \"" << d.variant << "\"\n";
        if (d.kind == "box" && !d.extent.empty()) {
            os << "extent = [";
            for (size_t i = 0; i < d.extent.size(); ++i)
                os << (i ? ", " : "") << format_double(d.extent[i]);
            os << "]\n";
        }
        if (d.kind == "union") {
            os << "members = [";
            for (size_t i = 0; i < d.members.size(); ++i)
                os << (i ? ", " : "") << "\"" << d.members[i] << "\"";
            os << "]\n";
        }
        if (d.kind == "dyadic-fractal") {
            os << "dimension = " << format_double(d.dimension) << "\n";
            os << "generations = " << d.generations << "\n";
            os << "r0 = " << format_double(d.r0) << "\n";
            os << "seed = " << d.seed << "\n";
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace parcap
