#include "chemo/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <sstream>

namespace chemo {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(int line, const std::string& what)
{
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

double to_double(std::string_view v, int line)
{
    v = trim(v);
    if (!v.empty() && v.front() == '+')
        v.remove_prefix(1);
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        fail(line, "expected a number, got '" + std::string(v) + "'");
    return x;
}

long to_long(std::string_view v, int line)
{
    v = trim(v);
    if (!v.empty() && v.front() == '+')
        v.remove_prefix(1);
    long x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        fail(line, "expected an integer, got '" + std::string(v) + "'");
    return x;
}

int to_int(std::string_view v, int line)
{
    const long x = to_long(v, line);
    if (x < -2147483647L || x > 2147483647L)
        fail(line, "integer out of range");
    return static_cast<int>(x);
}

bool to_bool(std::string_view v, int line)
{
    v = trim(v);
    if (v == "true")
        return true;
    if (v == "false")
        return false;
    fail(line, "expected true or false, got '" + std::string(v) + "'");
}

std::vector<double> to_list(std::string_view v, int line)
{
    v = trim(v);
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        fail(line, "expected a list [a, b, ...]");
    v = trim(v.substr(1, v.size() - 2));
    std::vector<double> out;
    while (!v.empty()) {
        const auto comma = v.find(',');
        out.push_back(to_double(v.substr(0, comma), line));
        if (comma == std::string_view::npos)
            break;
        v = v.substr(comma + 1);
        if (trim(v).empty())
            fail(line, "trailing comma in list");
    }
    return out;
}

Range to_range(std::string_view v, int line)
{
    const auto xs = to_list(v, line);
    if (xs.size() != 2 || !(xs[0] < xs[1]))
        fail(line, "expected a range [lo, hi] with lo < hi");
    return {xs[0], xs[1]};
}

template <typename E>
E to_enum(std::string_view v, int line, std::span<const std::pair<std::string_view, E>> names)
{
    v = trim(v);
    std::string allowed;
    for (const auto& [name, value] : names) {
        if (name == v)
            return value;
        allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    }
    fail(line, "expected one of " + allowed + ", got '" + std::string(v) + "'");
}

constexpr std::pair<std::string_view, Command> kCommands[] = {
    {"classify", Command::Classify}, {"sweep", Command::Sweep},       {"steady", Command::Steady},
    {"flow", Command::Flow},         {"blowdown", Command::Blowdown}, {"oracle", Command::Oracle},
    {"functional", Command::Functional}};
constexpr std::pair<std::string_view, GridKind> kGridKinds[] = {{"uniform", GridKind::Uniform}, {"graded", GridKind::Graded}};
constexpr std::pair<std::string_view, Profile> kProfiles[] = {
    {"uniform", Profile::Uniform}, {"gaussian", Profile::Gaussian}, {"bubble", Profile::Bubble}};
constexpr std::pair<std::string_view, BlowdownMode> kModes[] = {{"full", BlowdownMode::Full}, {"half", BlowdownMode::Half}};

using Setter = std::function<void(RunConfig&, std::string_view, int)>;
using Table = std::map<std::string, std::map<std::string, Setter>, std::less<>>;

const Table& setters()
{
    static const Table t = [] {
        Table t;
        t[""]["command"] = [](RunConfig& c, std::string_view v, int l) { c.command = to_enum<Command>(v, l, kCommands); };

        auto& p = t["params"];
        p["alpha"] = [](RunConfig& c, std::string_view v, int l) { c.params.alpha = to_double(v, l); };
        p["beta"] = [](RunConfig& c, std::string_view v, int l) { c.params.beta = to_double(v, l); };
        p["gamma"] = [](RunConfig& c, std::string_view v, int l) { c.params.gamma = to_double(v, l); };
        p["theta"] = [](RunConfig& c, std::string_view v, int l) { c.params.theta = to_int(v, l); };
        p["m1"] = [](RunConfig& c, std::string_view v, int l) { c.params.m1 = to_double(v, l); };
        p["m2"] = [](RunConfig& c, std::string_view v, int l) { c.params.m2 = to_double(v, l); };

        auto& g = t["grid"];
        g["n"] = [](RunConfig& c, std::string_view v, int l) { c.grid_n = to_int(v, l); };
        g["kind"] = [](RunConfig& c, std::string_view v, int l) {
            c.grid_kind = to_enum<GridKind>(v, l, kGridKinds);
        };

        auto& s = t["solver"];
        s["tol"] = [](RunConfig& c, std::string_view v, int l) { c.solve.tol = to_double(v, l); };
        s["max_iter"] = [](RunConfig& c, std::string_view v, int l) { c.solve.max_iter = to_int(v, l); };
        s["damping"] = [](RunConfig& c, std::string_view v, int l) { c.solve.damping = to_double(v, l); };
        s["min_damping"] = [](RunConfig& c, std::string_view v, int l) { c.solve.min_damping = to_double(v, l); };
        s["continuation_steps"] = [](RunConfig& c, std::string_view v, int l) {
            c.solve.continuation_steps = to_int(v, l);
        };
        s["max_continuation_steps"] = [](RunConfig& c, std::string_view v, int l) {
            c.solve.max_continuation_steps = to_int(v, l);
        };

        auto& d = t["density"];
        d["profile"] = [](RunConfig& c, std::string_view v, int l) {
            c.density.profile = to_enum<Profile>(v, l, kProfiles);
        };
        d["width"] = [](RunConfig& c, std::string_view v, int l) { c.density.width = to_double(v, l); };
        d["perturb"] = [](RunConfig& c, std::string_view v, int l) { c.density.perturb = to_double(v, l); };

        auto& w = t["sweep"];
        w["m1_range"] = [](RunConfig& c, std::string_view v, int l) { c.m1_range = to_range(v, l); };
        w["m2_range"] = [](RunConfig& c, std::string_view v, int l) { c.m2_range = to_range(v, l); };
        w["resolution"] = [](RunConfig& c, std::string_view v, int l) { c.resolution = to_int(v, l); };

        auto& b = t["blowdown"];
        b["psi"] = [](RunConfig& c, std::string_view v, int l) { c.psis = to_list(v, l); };
        b["mode"] = [](RunConfig& c, std::string_view v, int l) {
            c.mode = to_enum<BlowdownMode>(v, l, kModes);
        };

        auto& f = t["flow"];
        f["delta1"] = [](RunConfig& c, std::string_view v, int l) { c.flow.delta1 = to_double(v, l); };
        f["delta2"] = [](RunConfig& c, std::string_view v, int l) { c.flow.delta2 = to_double(v, l); };
        f["epsilon"] = [](RunConfig& c, std::string_view v, int l) { c.flow.epsilon = to_double(v, l); };
        f["dt"] = [](RunConfig& c, std::string_view v, int l) { c.flow.dt = to_double(v, l); };
        f["t_end"] = [](RunConfig& c, std::string_view v, int l) { c.flow.t_end = to_double(v, l); };
        f["adapt"] = [](RunConfig& c, std::string_view v, int l) { c.flow.adapt = to_bool(v, l); };
        f["dt_max"] = [](RunConfig& c, std::string_view v, int l) { c.flow.dt_max = to_double(v, l); };
        f["energy_tol"] = [](RunConfig& c, std::string_view v, int l) { c.flow.energy_tol = to_double(v, l); };
        f["steady_tol"] = [](RunConfig& c, std::string_view v, int l) { c.flow.steady_tol = to_double(v, l); };
        f["max_steps"] = [](RunConfig& c, std::string_view v, int l) { c.flow.max_steps = to_long(v, l); };

        auto& o = t["oracle"];
        o["gamma"] = [](RunConfig& c, std::string_view v, int l) { c.lemw.gamma = to_double(v, l); };
        o["beta_m"] = [](RunConfig& c, std::string_view v, int l) { c.lemw.beta_m = to_double(v, l); };
        o["m2"] = [](RunConfig& c, std::string_view v, int l) { c.lemw.m2 = to_double(v, l); };
        o["psi"] = [](RunConfig& c, std::string_view v, int l) { c.oracle_psis = to_list(v, l); };
        o["steps"] = [](RunConfig& c, std::string_view v, int l) { c.oracle_steps = to_int(v, l); };
        return t;
    }();
    return t;
}

void validate(RunConfig& c)
{
    c.params = validate_params(c.params);
    if (c.grid_n < 8)
        throw Error(ErrorCode::TooCoarse, "grid n must be >= 8");
    validate_options(c.solve);
    if (!(c.density.width > 0.0) || !(c.density.perturb >= 0.0) || c.density.perturb >= 1.0)
        throw Error(ErrorCode::InvalidArgument, "density width must be > 0 and perturb in [0, 1)");
    if (c.resolution < 1)
        throw Error(ErrorCode::InvalidArgument, "sweep resolution must be >= 1");
    if (c.command == Command::Flow)
        flow_case(c.flow);
    if (c.command == Command::Blowdown) {
        BlowdownFamily<double> probe{RadialField<double>::zero(make_grid(8)), RadialField<double>::zero(make_grid(8)),
                                     c.psis, c.mode};
        probe.validate();
    }
    if (c.command == Command::Oracle) {
        if (c.oracle_psis.empty())
            throw Error(ErrorCode::InvalidArgument, "oracle needs at least one psi");
        for (double psi : c.oracle_psis) {
            LemwParams lp = c.lemw;
            lp.psi = psi;
            validate_lemw(lp);
        }
    }
}

void put(std::ostringstream& os, std::string_view key, double x) { os << key << " = " << format_number(x) << '\n'; }

void put_list(std::ostringstream& os, std::string_view key, const std::vector<double>& xs)
{
    os << key << " = [";
    for (std::size_t k = 0; k < xs.size(); ++k)
        os << (k ? ", " : "") << format_number(xs[k]);
    os << "]\n";
}

} // namespace

std::string_view to_string(Command c) noexcept
{
    for (const auto& [name, value] : kCommands)
        if (value == c)
            return name;
    return "?";
}

std::string format_number(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

RunConfig parse_config(std::string_view text)
{
    RunConfig cfg;
    const auto& table = setters();
    std::string section;
    std::set<std::string> seen;
    bool have_command = false;
    int line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail(line_no, "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty() || !table.count(section))
                throw Error(ErrorCode::UnknownKey, "line " + std::to_string(line_no) + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            fail(line_no, "expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty())
            fail(line_no, "empty key");
        const auto& keys = table.at(section);
        const auto it = keys.find(key);
        const std::string qualified = section.empty() ? key : section + "." + key;
        if (it == keys.end())
            throw Error(ErrorCode::UnknownKey, "line " + std::to_string(line_no) + ": unknown key '" + qualified + "'");
        if (!seen.insert(qualified).second)
            fail(line_no, "duplicate key '" + qualified + "'");
        if (value.empty())
            fail(line_no, "missing value for '" + qualified + "'");
        it->second(cfg, value, line_no);
        have_command |= qualified == "command";
    }
    if (!have_command)
        throw Error(ErrorCode::ParseError, "missing required key 'command'");
    validate(cfg);
    return cfg;
}

std::string echo_config(const RunConfig& c)
{
    std::ostringstream os;
    os << "command = " << to_string(c.command) << '\n';
    os << "[params]\n";
    put(os, "alpha", c.params.alpha);
    put(os, "beta", c.params.beta);
    put(os, "gamma", c.params.gamma);
    os << "theta = " << c.params.theta << '\n';
    put(os, "m1", c.params.m1);
    put(os, "m2", c.params.m2);
    os << "[grid]\nn = " << c.grid_n << "\nkind = " << (c.grid_kind == GridKind::Uniform ? "uniform" : "graded")
       << '\n';
    os << "[solver]\n";
    put(os, "tol", c.solve.tol);
    os << "max_iter = " << c.solve.max_iter << '\n';
    put(os, "damping", c.solve.damping);
    put(os, "min_damping", c.solve.min_damping);
    os << "continuation_steps = " << c.solve.continuation_steps << '\n';
    os << "max_continuation_steps = " << c.solve.max_continuation_steps << '\n';
    os << "[density]\nprofile = "
       << (c.density.profile == Profile::Uniform ? "uniform" : c.density.profile == Profile::Gaussian ? "gaussian" : "bubble")
       << '\n';
    put(os, "width", c.density.width);
    put(os, "perturb", c.density.perturb);
    os << "[sweep]\n";
    put_list(os, "m1_range", {c.m1_range.lo, c.m1_range.hi});
    put_list(os, "m2_range", {c.m2_range.lo, c.m2_range.hi});
    os << "resolution = " << c.resolution << '\n';
    os << "[blowdown]\n";
    put_list(os, "psi", c.psis);
    os << "mode = " << (c.mode == BlowdownMode::Full ? "full" : "half") << '\n';
    os << "[flow]\n";
    put(os, "delta1", c.flow.delta1);
    put(os, "delta2", c.flow.delta2);
    put(os, "epsilon", c.flow.epsilon);
    put(os, "dt", c.flow.dt);
    put(os, "t_end", c.flow.t_end);
    os << "adapt = " << (c.flow.adapt ? "true" : "false") << '\n';
    put(os, "dt_max", c.flow.dt_max);
    put(os, "energy_tol", c.flow.energy_tol);
    put(os, "steady_tol", c.flow.steady_tol);
    os << "max_steps = " << c.flow.max_steps << '\n';
    os << "[oracle]\n";
    put(os, "gamma", c.lemw.gamma);
    put(os, "beta_m", c.lemw.beta_m);
    put(os, "m2", c.lemw.m2);
    put_list(os, "psi", c.oracle_psis);
    os << "steps = " << c.oracle_steps << '\n';
    return os.str();
}

} // namespace chemo
