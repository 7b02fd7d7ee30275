#include "fscil/core.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace fscil {

std::string ProtocolConfig::check() const {
    if (base_classes < 1) return "base_classes must be >= 1";
    if (sessions < 0) return "sessions must be >= 0";
    if (way < 1) return "way must be >= 1";
    if (shot < 1) return "shot must be >= 1";
    if (dim < 1) return "dim must be >= 1";
    if (total_classes != base_classes + sessions * way) {
        std::ostringstream os;
        os << "total_classes (" << total_classes << ") != base_classes + sessions*way ("
           << base_classes + sessions * way << ")";
        return os.str();
    }
    return {};
}

int ProtocolConfig::session_of(ClassId id) const {
    if (id < 0 || id >= total_classes) {
        throw std::out_of_range("class id " + std::to_string(id) + " outside [0, " +
                                std::to_string(total_classes) + ")");
    }
    if (id < base_classes) return 0;
    return (id - base_classes) / way + 1;
}

ClassId ProtocolConfig::first_class(int session) const {
    return session == 0 ? 0 : base_classes + (session - 1) * way;
}

ClassId ProtocolConfig::end_class(int session) const {
    return base_classes + session * way;
}

const char* to_string(Variant v) {
    switch (v) {
        case Variant::Baseline: return "baseline";
        case Variant::Exp2: return "exp2";
        case Variant::Average: return "average";
        case Variant::Weight: return "weight";
    }
    return "?";
}

Variant parse_variant(const std::string& name) {
    if (name == "baseline") return Variant::Baseline;
    if (name == "exp2") return Variant::Exp2;
    if (name == "average") return Variant::Average;
    if (name == "weight") return Variant::Weight;
    throw ParseError("unknown strategy '" + name + "'");
}

std::string StrategyConfig::check() const {
    if (R < 1) return "R must be >= 1";
    if (!(tau >= -1.0 && tau <= 1.0)) return "tau must lie in [-1, 1]";
    if (!(beta_base > 0.0 && beta_base < 1.0)) return "beta_base must lie in (0, 1)";
    if (!(beta_inc > 0.0 && beta_inc < 1.0)) return "beta_inc must lie in (0, 1)";
    return {};
}

std::string ValidationReport::to_string() const {
    if (ok) return "ok";
    std::ostringstream os;
    for (const auto& v : violations) os << v.kind << ": " << v.message << '\n';
    return os.str();
}

ValidationError::ValidationError(ValidationReport report)
    : std::runtime_error("dataset validation failed: " + report.to_string()),
      report_(std::move(report)) {}

namespace {

class Collector {
  public:
    void add(std::string kind, std::string message) {
        report_.ok = false;
        report_.violations.push_back({std::move(kind), std::move(message)});
    }
    ValidationReport take() { return std::move(report_); }

  private:
    ValidationReport report_;
};

void check_feature(const ProtocolConfig& cfg, const LabeledSample& s, const char* split, int session,
                   std::size_t index, Collector& out) {
    const std::string where = std::string(split) + " session " + std::to_string(session) +
                              " sample " + std::to_string(index) + " (class " +
                              std::to_string(s.label) + ")";
    if (static_cast<int>(s.feature.size()) != cfg.dim) {
        out.add("dimension", where + ": expected " + std::to_string(cfg.dim) + " values, got " +
                                 std::to_string(s.feature.size()));
        return;
    }
    bool nonzero = false;
    for (double v : s.feature) {
        if (!std::isfinite(v)) {
            out.add("non-finite", where + ": non-finite feature value");
            return;
        }
        nonzero = nonzero || v != 0.0;
    }
    if (!nonzero) out.add("degenerate vector", where + ": zero-norm feature");
}

}  // namespace

ValidationReport validate(const SessionDataset& dataset) {
    Collector out;
    const auto& cfg = dataset.config;
    if (auto msg = cfg.check(); !msg.empty()) {
        out.add("config", msg);
        return out.take();
    }
    const auto sessions = static_cast<std::size_t>(cfg.sessions) + 1;
    if (dataset.train.size() != sessions || dataset.test.size() != sessions) {
        out.add("session count", "expected " + std::to_string(sessions) +
                                      " train and test sessions, got " +
                                      std::to_string(dataset.train.size()) + " and " +
                                      std::to_string(dataset.test.size()));
        return out.take();
    }

    // class -> sessions whose train split contains it
    std::map<ClassId, std::set<int>> train_sessions;
    std::map<ClassId, int> train_counts;
    for (int t = 0; t <= cfg.sessions; ++t) {
        const auto& rows = dataset.train[static_cast<std::size_t>(t)];
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& s = rows[i];
            check_feature(cfg, s, "train", t, i, out);
            if (s.label < 0 || s.label >= cfg.total_classes) {
                out.add("unknown class", "train session " + std::to_string(t) + ": class " +
                                             std::to_string(s.label) + " not declared");
                continue;
            }
            train_sessions[s.label].insert(t);
            ++train_counts[s.label];
        }
    }

    for (const auto& [cls, where] : train_sessions) {
        if (where.size() > 1) {
            out.add("disjointness", "class " + std::to_string(cls) + " appears in train sets of sessions " +
                                        std::to_string(*where.begin()) + " and " +
                                        std::to_string(*std::next(where.begin())));
            continue;
        }
        const int t = *where.begin();
        if (cfg.session_of(cls) != t) {
            out.add("session membership", "class " + std::to_string(cls) + " belongs to session " +
                                              std::to_string(cfg.session_of(cls)) +
                                              " but appears in train session " + std::to_string(t));
        }
    }

    for (ClassId c = 0; c < cfg.total_classes; ++c) {
        const auto it = train_counts.find(c);
        const int count = it == train_counts.end() ? 0 : it->second;
        const int t = cfg.session_of(c);
        if (count == 0) {
            out.add("missing class", "session " + std::to_string(t) + ": class " + std::to_string(c) +
                                         " has no train samples");
        } else if (t >= 1 && count != cfg.shot) {
            out.add("shot count", "session " + std::to_string(t) + ": class " + std::to_string(c) + " has " +
                                      std::to_string(count) + " train samples, expected " +
                                      std::to_string(cfg.shot));
        }
    }

    for (int t = 0; t <= cfg.sessions; ++t) {
        const auto& rows = dataset.test[static_cast<std::size_t>(t)];
        const ClassId seen = cfg.seen_classes(t);
        if (rows.empty()) out.add("empty test set", "test session " + std::to_string(t) + " has no samples");
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& s = rows[i];
            check_feature(cfg, s, "test", t, i, out);
            if (s.label < 0 || s.label >= seen) {
                out.add("unseen test class", "test session " + std::to_string(t) + " sample " +
                                                 std::to_string(i) + ": class " + std::to_string(s.label) +
                                                 " not seen by session " + std::to_string(t));
            }
        }
    }
    return out.take();
}

namespace {

struct Fnv1a {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    void byte(unsigned char b) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) byte(static_cast<unsigned char>(v >> (8 * i)));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

void hash_split(Fnv1a& h, const std::vector<std::vector<LabeledSample>>& split) {
    h.u64(split.size());
    for (const auto& rows : split) {
        h.u64(rows.size());
        for (const auto& s : rows) {
            h.i64(s.label);
            for (double v : s.feature) h.f64(v);
        }
    }
}

}  // namespace

std::uint64_t fingerprint(const SessionDataset& dataset) {
    Fnv1a h;
    const auto& c = dataset.config;
    for (int v : {c.total_classes, c.base_classes, c.sessions, c.way, c.shot, c.dim}) h.i64(v);
    hash_split(h, dataset.train);
    hash_split(h, dataset.test);
    return h.h;
}

}  // namespace fscil
