#include "axlab/model.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace axlab {

std::string_view to_string(Topology t)
{
    return t == Topology::ring ? "ring" : "interval";
}

Topology parse_topology(std::string_view s)
{
    if (s == "interval") return Topology::interval;
    if (s == "ring") return Topology::ring;
    throw std::invalid_argument("unknown topology '" + std::string(s) + "' (expected interval or ring)");
}

void ModelParams::validate() const
{
    if (F < 2) throw std::invalid_argument("F must satisfy F >= 2 (got " + std::to_string(F) + ")");
    if (q < 2) throw std::invalid_argument("q must satisfy q >= 2 (got " + std::to_string(q) + ")");
    if (q > 65535) throw std::invalid_argument("q must satisfy q <= 65535");
    if (L < 2) throw std::invalid_argument("L must satisfy L >= 2 (got " + std::to_string(L) + ")");
    if (topology == Topology::ring && L < 3)
        throw std::invalid_argument("ring topology requires L >= 3 (got " + std::to_string(L) + ")");
}

std::optional<int> ModelParams::edge_between(int x, int y) const
{
    if (x < 0 || y < 0 || x >= L || y >= L) return std::nullopt;
    if (y == x + 1) return x;
    if (x == y + 1) return y;
    if (topology == Topology::ring) {
        if (x == L - 1 && y == 0) return L - 1;
        if (y == L - 1 && x == 0) return L - 1;
    }
    return std::nullopt;
}

std::optional<int> ModelParams::opposite_neighbor(int x, int y) const
{
    if (topology == Topology::ring) {
        const int right = x + 1 == L ? 0 : x + 1;
        const int left = x == 0 ? L - 1 : x - 1;
        return y == right ? left : right;
    }
    const int z = 2 * x - y;
    if (z < 0 || z >= L) return std::nullopt;
    return z;
}

std::string describe(const ModelParams& p)
{
    std::ostringstream os;
    os << "F=" << p.F << " q=" << p.q << " L=" << p.L << " topology=" << to_string(p.topology);
    return os.str();
}

Configuration::Configuration(const ModelParams& params, State fill)
    : params_(params), cells_(static_cast<std::size_t>(params.L) * params.F, fill)
{
    params_.validate();
}

Configuration::Configuration(const ModelParams& params, std::vector<State> cells)
    : params_(params), cells_(std::move(cells))
{
    params_.validate();
    if (cells_.size() != static_cast<std::size_t>(params_.L) * params_.F)
        throw std::invalid_argument("configuration has wrong number of cells");
    for (State s : cells_)
        if (s < 1 || s > params_.q) throw std::invalid_argument("state outside 1..q");
}

namespace {
std::vector<State> flatten(const ModelParams& p, const std::vector<std::vector<int>>& cultures)
{
    if (static_cast<int>(cultures.size()) != p.L)
        throw std::invalid_argument("expected one culture per vertex");
    std::vector<State> cells;
    cells.reserve(static_cast<std::size_t>(p.L) * p.F);
    for (const auto& c : cultures) {
        if (static_cast<int>(c.size()) != p.F) throw std::invalid_argument("culture length must equal F");
        for (int s : c) {
            if (s < 1 || s > p.q) throw std::invalid_argument("state outside 1..q");
            cells.push_back(static_cast<State>(s));
        }
    }
    return cells;
}
}  // namespace

Configuration::Configuration(const ModelParams& params, const std::vector<std::vector<int>>& cultures)
    : Configuration(params, flatten(params, cultures))
{
}

Configuration sample_pi0(const ModelParams& params, Rng& rng)
{
    params.validate();
    std::vector<State> cells(static_cast<std::size_t>(params.L) * params.F);
    for (auto& s : cells) s = static_cast<State>(1 + rng.below(static_cast<std::uint64_t>(params.q)));
    return Configuration(params, std::move(cells));
}

Configuration sample_pi0(const ModelParams& params, Seed seed)
{
    Rng rng(seed);
    return sample_pi0(params, rng);
}

int shared_features(const Configuration& c, int x, int y)
{
    auto a = c.culture(x);
    auto b = c.culture(y);
    int n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += a[i] == b[i];
    return n;
}

Ratio overlap(const Configuration& c, int x, int y)
{
    if (!c.params().edge_between(x, y))
        throw ContractError("overlap: vertices " + std::to_string(x) + " and " + std::to_string(y) +
                            " are not adjacent");
    return Ratio(shared_features(c, x, y), c.features());
}

void apply_update_in_place(Configuration& c, int x, int y, int i)
{
    if (!c.params().edge_between(x, y)) throw ContractError("apply_update: vertices are not adjacent");
    if (i < 0 || i >= c.features()) throw ContractError("apply_update: feature out of range");
    c.set_state(x, i, c.state(y, i));
}

Configuration apply_update(const Configuration& c, int x, int y, int i)
{
    Configuration out = c;
    apply_update_in_place(out, x, y, i);
    return out;
}

bool is_absorbed(const Configuration& c)
{
    const auto& p = c.params();
    for (int e = 0; e < p.edge_count(); ++e) {
        const int k = shared_features(c, p.left_of(e), p.right_of(e));
        if (k != 0 && k != p.F) return false;
    }
    return true;
}

int blockade_count(const Configuration& c)
{
    const auto& p = c.params();
    int n = 0;
    for (int e = 0; e < p.edge_count(); ++e) n += shared_features(c, p.left_of(e), p.right_of(e)) == 0;
    return n;
}

int domain_count(const Configuration& c)
{
    const auto& p = c.params();
    int walls = 0;
    for (int e = 0; e < p.edge_count(); ++e) walls += shared_features(c, p.left_of(e), p.right_of(e)) != p.F;
    if (p.topology == Topology::ring) return walls == 0 ? 1 : walls;
    return walls + 1;
}

void write_configuration(std::ostream& os, const Configuration& c)
{
    os << describe(c.params()) << '\n';
    for (int x = 0; x < c.vertices(); ++x) {
        auto cul = c.culture(x);
        for (std::size_t i = 0; i < cul.size(); ++i) {
            if (i) os << ',';
            os << cul[i];
        }
        os << '\n';
    }
}

namespace {
int parse_int(std::string_view s, std::string_view what)
{
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
    return v;
}
}  // namespace

ModelParams parse_params_header(std::string_view line)
{
    ModelParams p;
    bool seen[4] = {};
    std::istringstream is{std::string(line)};
    std::string tok;
    while (is >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string_view key(tok.data(), eq);
        std::string_view val(tok.data() + eq + 1, tok.size() - eq - 1);
        if (key == "F") p.F = parse_int(val, "F"), seen[0] = true;
        else if (key == "q") p.q = parse_int(val, "q"), seen[1] = true;
        else if (key == "L") p.L = parse_int(val, "L"), seen[2] = true;
        else if (key == "topology") p.topology = parse_topology(val), seen[3] = true;
    }
    if (!(seen[0] && seen[1] && seen[2] && seen[3]))
        throw std::invalid_argument("parameter header must carry F, q, L and topology");
    p.validate();
    return p;
}

Configuration read_configuration(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("missing configuration header");
    const ModelParams p = parse_params_header(line);
    std::vector<State> cells;
    cells.reserve(static_cast<std::size_t>(p.L) * p.F);
    for (int x = 0; x < p.L; ++x) {
        if (!std::getline(is, line)) throw std::invalid_argument("configuration truncated at vertex " + std::to_string(x));
        std::string_view rest(line);
        int count = 0;
        while (!rest.empty()) {
            auto comma = rest.find(',');
            auto field = rest.substr(0, comma);
            cells.push_back(static_cast<State>(parse_int(field, "state")));
            ++count;
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
        if (count != p.F)
            throw std::invalid_argument("vertex " + std::to_string(x) + " has " + std::to_string(count) +
                                        " features, expected " + std::to_string(p.F));
    }
    return Configuration(p, std::move(cells));
}

}  // namespace axlab
