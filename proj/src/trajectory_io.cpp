#include "axlab/trajectory_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

namespace axlab {

std::string format_real(double v)
{
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

double parse_real(std::string_view s)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("cannot parse real from '" + std::string(s) + "'");
    return v;
}

namespace {

std::uint64_t parse_u64(std::string_view s)
{
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("cannot parse integer from '" + std::string(s) + "'");
    return v;
}

int parse_int(std::string_view s)
{
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("cannot parse integer from '" + std::string(s) + "'");
    return v;
}

std::map<std::string, std::string> key_values(const std::string& line)
{
    std::map<std::string, std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        auto eq = tok.find('=');
        if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key)
{
    auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("trajectory header is missing '" + key + "'");
    return it->second;
}

std::string next_line(std::istream& is, const char* what)
{
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument(std::string("trajectory truncated: expected ") + what);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

void write_cultures(std::ostream& os, const Configuration& c)
{
    for (int x = 0; x < c.vertices(); ++x) {
        auto cul = c.culture(x);
        for (std::size_t i = 0; i < cul.size(); ++i) {
            if (i) os << ',';
            os << cul[i];
        }
        os << '\n';
    }
}

Configuration read_cultures(std::istream& is, const ModelParams& p)
{
    std::ostringstream block;
    block << describe(p) << '\n';
    for (int x = 0; x < p.L; ++x) block << next_line(is, "culture line") << '\n';
    std::istringstream in(block.str());
    return read_configuration(in);
}

}  // namespace

void write_trajectory(std::ostream& os, const Trajectory& t)
{
    os << trajectory_format_tag << '\n';
    os << describe(t.params) << '\n';
    os << "engine=" << to_string(t.engine) << " seed=" << t.seed.value
       << " horizon=" << format_real(t.options.horizon) << " event_cap=" << t.options.event_cap
       << " log=" << to_string(t.options.log) << '\n';
    os << "end_time=" << format_real(t.end_time) << " absorbed=" << (t.absorbed ? 1 : 0)
       << " stop=" << to_string(t.stop) << " arrows=" << t.arrows_drawn
       << " effective=" << t.effective_events << '\n';
    os << "initial\n";
    write_cultures(os, t.initial);
    os << "events " << t.events.size() << '\n';
    for (const auto& e : t.events) {
        os << format_real(e.time) << ',' << e.source << ',' << e.target << ',' << e.feature << ','
           << format_real(e.mark) << ',' << (e.active ? 1 : 0) << ',' << (e.effective ? 1 : 0) << '\n';
    }
    os << "final\n";
    write_cultures(os, t.final);
}

Trajectory read_trajectory(std::istream& is)
{
    if (next_line(is, "format tag") != trajectory_format_tag)
        throw std::invalid_argument(std::string("not a trajectory log (expected '") + trajectory_format_tag + "')");
    Trajectory t;
    t.params = parse_params_header(next_line(is, "parameter line"));

    const auto run = key_values(next_line(is, "run line"));
    t.engine = parse_engine(require(run, "engine"));
    t.seed = Seed{parse_u64(require(run, "seed"))};
    t.options.horizon = parse_real(require(run, "horizon"));
    t.options.event_cap = parse_u64(require(run, "event_cap"));
    t.options.log = parse_log_policy(require(run, "log"));

    const auto outcome = key_values(next_line(is, "outcome line"));
    t.end_time = parse_real(require(outcome, "end_time"));
    t.absorbed = parse_int(require(outcome, "absorbed")) != 0;
    t.stop = parse_stop_reason(require(outcome, "stop"));
    t.arrows_drawn = parse_u64(require(outcome, "arrows"));
    t.effective_events = parse_u64(require(outcome, "effective"));

    if (next_line(is, "'initial'") != "initial") throw std::invalid_argument("expected 'initial' section");
    t.initial = read_cultures(is, t.params);

    const std::string events_line = next_line(is, "'events <n>'");
    if (events_line.rfind("events ", 0) != 0) throw std::invalid_argument("expected 'events <n>' section");
    const std::uint64_t n = parse_u64(std::string_view(events_line).substr(7));
    t.events.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        const std::string line = next_line(is, "event line");
        std::array<std::string_view, 7> f{};
        std::string_view rest(line);
        for (std::size_t c = 0; c < f.size(); ++c) {
            const auto comma = rest.find(',');
            if ((comma == std::string_view::npos) != (c + 1 == f.size()))
                throw std::invalid_argument("event line " + std::to_string(k) + " must have 7 fields");
            f[c] = rest.substr(0, comma);
            if (comma != std::string_view::npos) rest = rest.substr(comma + 1);
        }
        ArrowRecord r;
        r.time = parse_real(f[0]);
        r.source = parse_int(f[1]);
        r.target = parse_int(f[2]);
        r.feature = parse_int(f[3]);
        r.mark = parse_real(f[4]);
        r.active = parse_int(f[5]) != 0;
        r.effective = parse_int(f[6]) != 0;
        t.events.push_back(r);
    }
    if (next_line(is, "'final'") != "final") throw std::invalid_argument("expected 'final' section");
    t.final = read_cultures(is, t.params);
    return t;
}

void save_trajectory(const std::filesystem::path& path, const Trajectory& t)
{
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_trajectory(os, t);
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

Trajectory load_trajectory(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    return read_trajectory(is);
}

}  // namespace axlab
