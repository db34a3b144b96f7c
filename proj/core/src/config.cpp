#include "cfphase/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace cfphase {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    std::stringstream in(v);
    std::string item;
    while (std::getline(in, item, ','))
        out.push_back(trim(item));
    return out;
}

bool to_double(const std::string& s, double& out)
{
    if (s.empty())
        return false;
    const char* first = s.data();
    if (*first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool to_long(const std::string& s, long& out)
{
    if (s.empty())
        return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::string join(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k)
        out += (k ? "," : "") + format_number(v[k]);
    return out;
}

std::string to_string(CouplingMode m)
{
    switch (m) {
    case CouplingMode::Direct:
        return "direct";
    case CouplingMode::Mollified:
        return "mollified";
    case CouplingMode::Picard:
        return "picard";
    }
    return "direct";
}

struct Line {
    std::string value;
    int line;
};

class Parser {
public:
    explicit Parser(std::vector<std::string>& errors) : errors_(errors) {}

    void error(const std::string& key, const Line& l, const std::string& what)
    {
        std::ostringstream msg;
        if (l.line > 0)
            msg << "line " << l.line << ": ";
        msg << key << ": " << what;
        errors_.push_back(msg.str());
    }

    bool number(const std::string& key, const Line& l, double& out)
    {
        double v;
        if (!to_double(l.value, v)) {
            error(key, l, "expected a number, got '" + l.value + "'");
            return false;
        }
        out = v;
        return true;
    }

    template <class Int>
    bool integer(const std::string& key, const Line& l, Int& out)
    {
        long v;
        if (!to_long(l.value, v)) {
            error(key, l, "expected an integer, got '" + l.value + "'");
            return false;
        }
        out = static_cast<Int>(v);
        return true;
    }

    bool numbers(const std::string& key, const Line& l, std::vector<double>& out,
                 std::size_t expect = 0)
    {
        std::vector<double> v;
        for (const auto& item : split_list(l.value)) {
            double x;
            if (!to_double(item, x)) {
                error(key, l, "expected a comma-separated list of numbers, got '" + l.value + "'");
                return false;
            }
            v.push_back(x);
        }
        if (v.empty() || (expect && v.size() != expect)) {
            error(key, l,
                  expect ? "expected " + std::to_string(expect) + " numbers, got " +
                               std::to_string(v.size())
                         : std::string("expected at least one number"));
            return false;
        }
        out = std::move(v);
        return true;
    }

private:
    std::vector<std::string>& errors_;
};

std::vector<std::pair<std::string, std::string>> make_echo(const RunConfig& c,
                                                           const std::vector<double>& tensor,
                                                           const std::vector<double>& coeffs,
                                                           const std::vector<double>& wells)
{
    const auto& p = c.params;
    const auto& s = c.solver;
    const SymMatrix3& e = p.misfit;
    std::vector<std::pair<std::string, std::string>> out = {
        {"c", format_number(p.c)},
        {"nu", format_number(p.nu)},
        {"kappa", format_number(p.kappa)},
        {"a", format_number(p.a)},
        {"d", format_number(p.d)},
        {"t_end", format_number(p.t_end)},
        {"N", std::to_string(c.cells)},
    };
    if (tensor.empty()) {
        const auto& m = p.stiffness.mandel();
        out.emplace_back("lame_lambda", format_number(m(0, 1)));
        out.emplace_back("lame_mu", format_number(0.5 * (m(0, 0) - m(0, 1))));
    } else {
        out.emplace_back("elastic_tensor", join(tensor));
    }
    out.emplace_back("epsbar", join({e(0, 0), e(1, 1), e(2, 2), e(1, 2), e(0, 2), e(0, 1)}));
    out.emplace_back("potential", p.potential.is_default_quartic() ? "quartic" : "polynomial");
    if (!p.potential.is_default_quartic()) {
        out.emplace_back("potential_coeffs", join(coeffs));
        out.emplace_back("potential_wells", join(wells));
    }
    out.emplace_back("coupling", to_string(s.coupling));
    out.emplace_back("picard_sweeps", std::to_string(s.picard_sweeps));
    out.emplace_back("cfl_safety", format_number(s.cfl_safety));
    out.emplace_back("max_steps", std::to_string(s.max_steps));
    out.emplace_back("snapshot_stride", std::to_string(s.snapshot_stride));
    out.emplace_back("snapshot_interval", format_number(s.snapshot_interval));
    out.emplace_back("dt_override", format_number(s.dt_override));
    out.emplace_back("mollifier_samples", std::to_string(s.mollifier_samples));
    out.emplace_back("initial_profile", to_string(c.profile));
    out.emplace_back("initial_amplitude", format_number(c.amplitude));
    out.emplace_back("initial_width", format_number(c.width));
    out.emplace_back("body_force", c.body_force.kind);
    const Vec3& bv = c.body_force.vector;
    out.emplace_back("body_force_vector", join({bv(0), bv(1), bv(2)}));
    out.emplace_back("body_force_wavenumber", format_number(c.body_force.wavenumber));
    out.emplace_back("output_dir", c.output_dir);
    out.emplace_back("emit_stride", std::to_string(c.emit_stride));
    out.emplace_back("kappas", join(c.kappas));
    std::string levels;
    for (std::size_t k = 0; k < c.mms_levels.size(); ++k)
        levels += (k ? "," : "") + std::to_string(c.mms_levels[k]);
    out.emplace_back("mms_levels", levels);
    out.emplace_back("mms_amplitude", format_number(c.mms_amplitude));
    return out;
}

} // namespace

std::string format_number(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

BodyForce BodyForceSpec::build(double a, double d) const
{
    if (kind == "zero")
        return BodyForce::zero();
    if (kind == "constant")
        return BodyForce::constant(vector);
    if (kind == "sine")
        return BodyForce::sine(vector, wavenumber, a, d);
    throw std::invalid_argument("unknown body force '" + kind + "'");
}

ScalarField RunConfig::initial_data() const { return make_initial_profile(profile, amplitude, grid(), width); }

ConfigError::ConfigError(std::vector<std::string> messages)
    : std::runtime_error([&] {
          std::string s = "invalid configuration:";
          for (const auto& m : messages)
              s += "\n  " + m;
          return s;
      }()),
      messages_(std::move(messages))
{
}

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = {
        "c",           "nu",           "kappa",           "a",
        "d",           "t_end",        "N",               "lame_lambda",
        "lame_mu",     "elastic_tensor", "epsbar",        "potential",
        "potential_coeffs", "potential_wells", "coupling", "picard_sweeps",
        "cfl_safety",  "max_steps",    "snapshot_stride", "snapshot_interval",
        "dt_override", "mollifier_samples", "initial_profile", "initial_amplitude",
        "initial_width", "body_force", "body_force_vector", "body_force_wavenumber",
        "output_dir",  "emit_stride",  "kappas",          "mms_levels",
        "mms_amplitude"};
    return keys;
}

RunConfig parse_config(std::string_view text)
{
    std::vector<std::string> errors;
    std::map<std::string, Line> entries;

    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                             body + "'");
            continue;
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        const auto& keys = config_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            errors.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
            continue;
        }
        if (entries.count(key)) {
            errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key +
                             "' (first set on line " + std::to_string(entries[key].line) + ")");
            continue;
        }
        entries[key] = {value, lineno};
    }

    RunConfig cfg;
    ModelParams& p = cfg.params;
    SolverConfig& s = cfg.solver;
    s.snapshot_interval = 0.01;
    Parser parse(errors);
    const auto get = [&](const std::string& key) -> const Line* {
        const auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    };

    const std::pair<const char*, double*> scalars[] = {{"c", &p.c},         {"nu", &p.nu},
                                                       {"kappa", &p.kappa}, {"a", &p.a},
                                                       {"d", &p.d},         {"t_end", &p.t_end}};
    for (const auto& [key, target] : scalars)
        if (const Line* l = get(key))
            parse.number(key, *l, *target);
    if (const Line* l = get("N"); l && parse.integer("N", *l, cfg.cells) && cfg.cells < 4)
        parse.error("N", *l, "minimum grid size is 4 cells, got " + l->value);

    // Elasticity.
    double lambda = 1.0, mu = 1.0;
    std::vector<double> tensor;
    if (const Line* l = get("lame_lambda"))
        parse.number("lame_lambda", *l, lambda);
    if (const Line* l = get("lame_mu"))
        parse.number("lame_mu", *l, mu);
    if (const Line* l = get("elastic_tensor")) {
        if (get("lame_lambda") || get("lame_mu"))
            parse.error("elastic_tensor", *l, "cannot be combined with lame_lambda / lame_mu");
        else if (parse.numbers("elastic_tensor", *l, tensor, 36)) {
            try {
                Mat6 m;
                for (int i = 0; i < 6; ++i)
                    for (int j = 0; j < 6; ++j)
                        m(i, j) = tensor[static_cast<std::size_t>(6 * i + j)];
                p.stiffness = ElasticTensor(m);
            } catch (const std::exception& ex) {
                parse.error("elastic_tensor", *l, ex.what());
                tensor.clear();
            }
        }
    }
    if (tensor.empty()) {
        try {
            p.stiffness = ElasticTensor::isotropic(lambda, mu);
        } catch (const std::exception&) {
            const Line* l = get("lame_mu") ? get("lame_mu") : get("lame_lambda");
            parse.error("lame_lambda/lame_mu", l ? *l : Line{"", 0},
                        "isotropic tensor must be positive definite (mu > 0, 3 lambda + 2 mu > 0)");
        }
    }
    if (const Line* l = get("epsbar")) {
        std::vector<double> e;
        if (parse.numbers("epsbar", *l, e, 6))
            p.misfit = SymMatrix3::from_components(e[0], e[1], e[2], e[3], e[4], e[5]);
    }

    // Potential.
    std::vector<double> coeffs, wells;
    if (const Line* l = get("potential")) {
        if (l->value == "polynomial") {
            const Line* lc = get("potential_coeffs");
            const Line* lw = get("potential_wells");
            if (!lc || !lw)
                parse.error("potential", *l, "polynomial needs potential_coeffs and potential_wells");
            else if (parse.numbers("potential_coeffs", *lc, coeffs) &&
                     parse.numbers("potential_wells", *lw, wells, 3)) {
                try {
                    p.potential = DoubleWell::polynomial(coeffs, wells[0], wells[1], wells[2]);
                } catch (const std::exception& ex) {
                    parse.error("potential_coeffs", *lc, ex.what());
                }
            }
        } else if (l->value != "quartic") {
            parse.error("potential", *l, "expected quartic or polynomial, got '" + l->value + "'");
        }
    }
    for (const char* key : {"potential_coeffs", "potential_wells"})
        if (const Line* l = get(key); l && !(get("potential") && get("potential")->value == "polynomial"))
            parse.error(key, *l, "only valid with potential = polynomial");

    // Solver.
    if (const Line* l = get("coupling")) {
        if (l->value == "direct")
            s.coupling = CouplingMode::Direct;
        else if (l->value == "mollified")
            s.coupling = CouplingMode::Mollified;
        else if (l->value == "picard")
            s.coupling = CouplingMode::Picard;
        else
            parse.error("coupling", *l, "expected direct, mollified or picard, got '" + l->value + "'");
    }
    if (const Line* l = get("picard_sweeps"); l && parse.integer("picard_sweeps", *l, s.picard_sweeps) &&
                                              s.picard_sweeps < 1)
        parse.error("picard_sweeps", *l, "must be >= 1");
    if (const Line* l = get("cfl_safety"); l && parse.number("cfl_safety", *l, s.cfl_safety) &&
                                           !(s.cfl_safety > 0.0 && s.cfl_safety < 1.0))
        parse.error("cfl_safety", *l, "must lie in (0,1)");
    if (const Line* l = get("max_steps"); l && parse.integer("max_steps", *l, s.max_steps) &&
                                          s.max_steps < 1)
        parse.error("max_steps", *l, "must be >= 1");
    if (const Line* l = get("snapshot_stride"); l &&
                                                parse.integer("snapshot_stride", *l, s.snapshot_stride) &&
                                                s.snapshot_stride < 1)
        parse.error("snapshot_stride", *l, "must be >= 1");
    if (const Line* l = get("snapshot_interval");
        l && parse.number("snapshot_interval", *l, s.snapshot_interval) && !(s.snapshot_interval >= 0.0))
        parse.error("snapshot_interval", *l, "must be >= 0 (0 switches to snapshot_stride)");
    if (const Line* l = get("dt_override"); l && parse.number("dt_override", *l, s.dt_override) &&
                                            !(s.dt_override >= 0.0))
        parse.error("dt_override", *l, "must be >= 0 (0 selects the CFL rule)");
    if (const Line* l = get("mollifier_samples");
        l && parse.integer("mollifier_samples", *l, s.mollifier_samples) && s.mollifier_samples < 2)
        parse.error("mollifier_samples", *l, "must be >= 2");

    // Initial data.
    if (const Line* l = get("initial_profile")) {
        try {
            cfg.profile = parse_profile_kind(l->value);
        } catch (const std::exception& ex) {
            parse.error("initial_profile", *l, ex.what());
        }
    }
    if (const Line* l = get("initial_amplitude"); l && parse.number("initial_amplitude", *l, cfg.amplitude) &&
                                                  !std::isfinite(cfg.amplitude))
        parse.error("initial_amplitude", *l, "must be finite");
    if (const Line* l = get("initial_width"))
        parse.number("initial_width", *l, cfg.width);
    if (cfg.profile == ProfileKind::SmoothedStep && p.a < p.d &&
        !(cfg.width > 0.0 && cfg.width <= 0.5 * (p.d - p.a))) {
        const Line* l = get("initial_width");
        parse.error("initial_width", l ? *l : Line{"", 0}, "ramp width must lie in (0, (d-a)/2]");
    }

    // Body force.
    if (const Line* l = get("body_force")) {
        if (l->value == "zero" || l->value == "constant" || l->value == "sine")
            cfg.body_force.kind = l->value;
        else
            parse.error("body_force", *l, "expected zero, constant or sine, got '" + l->value + "'");
    }
    if (const Line* l = get("body_force_vector")) {
        std::vector<double> v;
        if (parse.numbers("body_force_vector", *l, v, 3))
            cfg.body_force.vector = Vec3(v[0], v[1], v[2]);
    }
    if (const Line* l = get("body_force_wavenumber"))
        parse.number("body_force_wavenumber", *l, cfg.body_force.wavenumber);

    // Output and extras.
    if (const Line* l = get("output_dir")) {
        if (l->value.empty())
            parse.error("output_dir", *l, "must not be empty");
        else
            cfg.output_dir = l->value;
    }
    if (const Line* l = get("emit_stride"); l && parse.integer("emit_stride", *l, cfg.emit_stride) &&
                                            cfg.emit_stride < 1)
        parse.error("emit_stride", *l, "must be >= 1");
    if (const Line* l = get("kappas"); l && parse.numbers("kappas", *l, cfg.kappas)) {
        for (std::size_t k = 0; k < cfg.kappas.size(); ++k) {
            if (!(cfg.kappas[k] > 0.0 && cfg.kappas[k] <= 1.0))
                parse.error("kappas", *l, "kappa must lie in (0,1], got " + format_number(cfg.kappas[k]));
            else if (k > 0 && !(cfg.kappas[k] < cfg.kappas[k - 1]))
                parse.error("kappas", *l, "list must be strictly decreasing");
        }
    }
    if (const Line* l = get("mms_levels")) {
        std::vector<double> v;
        if (parse.numbers("mms_levels", *l, v)) {
            cfg.mms_levels.clear();
            for (double x : v) {
                if (x != std::floor(x) || x < 4) {
                    parse.error("mms_levels", *l, "levels must be integers >= 4");
                    break;
                }
                cfg.mms_levels.push_back(static_cast<int>(x));
            }
        }
    }
    if (const Line* l = get("mms_amplitude"))
        parse.number("mms_amplitude", *l, cfg.mms_amplitude);

    // Model constraints, reported against the key that sets them.
    const auto model_error = [&](const char* key, bool ok, const std::string& what) {
        if (ok)
            return;
        const Line* l = get(key);
        parse.error(key, l ? *l : Line{"", 0}, what);
    };
    model_error("c", p.c > 0.0, "c must be > 0");
    model_error("nu", p.nu > 0.0, "nu must be > 0");
    model_error("kappa", p.kappa > 0.0 && p.kappa <= 1.0, "kappa must lie in (0,1]");
    model_error(get("d") ? "d" : "a", p.a < p.d, "domain endpoints must satisfy a < d");
    model_error("t_end", p.t_end > 0.0, "t_end must be > 0");
    model_error("epsbar", p.misfit.mandel().allFinite(), "misfit strain must be finite");

    if (!errors.empty())
        throw ConfigError(std::move(errors));
    cfg.echo = make_echo(cfg, tensor, coeffs, wells);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::ios_base::failure("cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace cfphase
