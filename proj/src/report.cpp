#include "moralprobe/report.hpp"

#include "moralprobe/csv.hpp"
#include "moralprobe/errors.hpp"
#include "moralprobe/matrix.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace moralprobe::report {

namespace fs = std::filesystem;

namespace {

std::string metric(double v) { return format_fixed(v, metric_places); }
std::string pval(double v) { return format_fixed(v, p_value_places); }

std::string empirical_provenance(const std::string &dataset) {
    return "empirical(" + dataset + ")";
}

std::string joined(const std::vector<std::string> &items, const std::string &sep) {
    std::string out;
    for (const auto &s : items) {
        out += (out.empty() ? "" : sep) + s;
    }
    return out;
}

Table variance_table(const Bundle &b) {
    Table t{"variance_table", {"dataset", "source", "mean", "variance", "provenance", "config_hash"},
            {}};
    for (const auto &d : b.datasets) {
        t.rows.push_back({d.dataset, "empirical", metric(d.empirical.mean),
                          metric(d.empirical.variance), empirical_provenance(d.dataset),
                          b.config_hash});
        for (const auto &m : d.models) {
            if (m.method1) {
                t.rows.push_back({d.dataset, m.model_id, metric(m.method1->model.mean),
                                  metric(m.method1->model.variance), m.provenance,
                                  b.config_hash});
            }
        }
    }
    return t;
}

Table variance_gap_table(const Bundle &b) {
    Table t{"variance_gap_table",
            {"dataset", "model_id", "topic", "survey_variance", "model_variance", "variance_gap",
             "survey_mean", "model_mean", "provenance", "config_hash"},
            {}};
    for (const auto &d : b.datasets) {
        for (const auto &m : d.models) {
            if (!m.method1) {
                continue;
            }
            for (const auto &r : m.method1->rows) {
                t.rows.push_back({d.dataset, m.model_id, r.topic, metric(r.survey_variance),
                                  metric(r.model_variance), metric(r.variance_gap),
                                  metric(r.survey_mean), metric(r.model_mean), m.provenance,
                                  b.config_hash});
            }
        }
    }
    return t;
}

Table correlation_summary(const Bundle &b) {
    Table t{"correlation_summary",
            {"dataset", "model_id", "r", "p_value", "n_topics", "note", "provenance",
             "config_hash"},
            {}};
    for (const auto &d : b.datasets) {
        for (const auto &m : d.models) {
            if (!m.method1) {
                continue;
            }
            const auto &c = m.method1->correlation;
            t.rows.push_back({d.dataset, m.model_id, c ? metric(c->r) : "",
                              c ? pval(c->p_value) : "", std::to_string(m.method1->rows.size()),
                              c ? "" : "variance vector constant; r undefined", m.provenance,
                              b.config_hash});
        }
    }
    return t;
}

Table alignment_table(const Bundle &b, analysis::SubsetKind kind, const std::string &name) {
    Table t{name,
            {"dataset", "model_id", "subset", "k", "topics", "ari", "ami", "cas", "provenance",
             "config_hash"},
            {}};
    for (const auto &d : b.datasets) {
        for (const auto &m : d.models) {
            const auto it = m.method2.find(kind);
            if (it == m.method2.end()) {
                continue;
            }
            const auto &r = it->second;
            t.rows.push_back({d.dataset, m.model_id, analysis::to_string(kind),
                              std::to_string(r.k), joined(r.topics, "; "),
                              metric(r.scores.ari), metric(r.scores.ami),
                              metric(displayed_cas(r.scores.ari, r.scores.ami)), m.provenance,
                              b.config_hash});
        }
    }
    return t;
}

Table probe_confusion(const Bundle &b) {
    Table t{"probe_confusion",
            {"dataset", "model_id", "positive_class", "accuracy", "precision", "recall", "f1",
             "tp", "fp", "fn", "tn", "outcomes", "skipped_topics", "ties", "provenance",
             "config_hash"},
            {}};
    for (const auto &d : b.datasets) {
        for (const auto &m : d.models) {
            if (!m.method3) {
                continue;
            }
            const auto &s = m.method3->stats;
            t.rows.push_back({d.dataset, m.model_id, b.positive_class, metric(s.accuracy),
                              metric(s.precision), metric(s.recall), metric(s.f1),
                              std::to_string(s.counts.tp), std::to_string(s.counts.fp),
                              std::to_string(s.counts.fn), std::to_string(s.counts.tn),
                              std::to_string(m.method3->outcomes.size()),
                              std::to_string(m.method3->skipped.size()),
                              std::to_string(m.method3->ties), m.provenance, b.config_hash});
        }
    }
    return t;
}

Table probe_chi(const Bundle &b) {
    Table t{"probe_chi",
            {"dataset", "model_id", "chi2", "dof", "p_value", "similar_pred_similar",
             "similar_pred_different", "different_pred_similar", "different_pred_different",
             "note", "provenance", "config_hash"},
            {}};
    for (const auto &d : b.datasets) {
        for (const auto &m : d.models) {
            if (!m.method3) {
                continue;
            }
            const auto &r = *m.method3;
            const auto &c = r.contingency;
            t.rows.push_back({d.dataset, m.model_id, r.chi ? metric(r.chi->statistic) : "",
                              r.chi ? std::to_string(r.chi->dof) : "",
                              r.chi ? pval(r.chi->p_value) : "", std::to_string(c[0][0]),
                              std::to_string(c[0][1]), std::to_string(c[1][0]),
                              std::to_string(c[1][1]), r.chi ? "" : r.chi_note, m.provenance,
                              b.config_hash});
        }
    }
    return t;
}

void add_rankings(Table &t, const std::string &dataset, const std::string &source,
                  const std::string &subset, const std::vector<analysis::RankedTopic> &ranked,
                  const std::string &provenance, const std::string &hash) {
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        t.rows.push_back({dataset, source, subset, std::to_string(i + 1), ranked[i].topic,
                          metric(ranked[i].variance), provenance, hash});
    }
}

Table topic_rankings(const Bundle &b) {
    Table t{"topic_rankings",
            {"dataset", "source", "subset", "rank", "topic", "variance", "provenance",
             "config_hash"},
            {}};
    for (const auto &d : b.datasets) {
        const auto prov = empirical_provenance(d.dataset);
        add_rankings(t, d.dataset, "empirical", "most_controversial", d.controversial, prov,
                     b.config_hash);
        add_rankings(t, d.dataset, "empirical", "most_agreed", d.agreed, prov, b.config_hash);
        for (const auto &m : d.models) {
            add_rankings(t, d.dataset, m.model_id, "most_controversial", m.controversial,
                         m.provenance, b.config_hash);
            add_rankings(t, d.dataset, m.model_id, "most_agreed", m.agreed, m.provenance,
                         b.config_hash);
        }
    }
    return t;
}

std::string md_cell(const std::string &s) {
    std::string out;
    for (char ch : s) {
        if (ch == '|') {
            out += "\\|";
        } else if (ch == '\n') {
            out += ' ';
        } else {
            out += ch;
        }
    }
    return out;
}

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out{path, std::ios::binary};
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << text;
}

} // namespace

double displayed_cas(double ari, double ami, int places) {
    const double scale = std::pow(10.0, places);
    const auto a = std::llround(round_to(ari, places) * scale);
    const auto m = std::llround(round_to(ami, places) * scale);
    const auto sum = a + m;
    // Halve, rounding half away from zero.
    const auto half = sum >= 0 ? (sum + 1) / 2 : -((-sum + 1) / 2);
    return static_cast<double>(half) / scale;
}

std::vector<Table> build_tables(const Bundle &b) {
    return {variance_table(b),
            variance_gap_table(b),
            correlation_summary(b),
            alignment_table(b, analysis::SubsetKind::all, "alignment_all"),
            alignment_table(b, analysis::SubsetKind::most_controversial,
                            "alignment_controversial"),
            alignment_table(b, analysis::SubsetKind::most_agreed, "alignment_agreed"),
            probe_confusion(b),
            probe_chi(b),
            topic_rankings(b)};
}

Table probe_outcome_table(const Bundle &b) {
    Table t{"probe_outcomes",
            {"dataset", "model_id", "topic", "country_x", "country_y", "truth", "predicted",
             "score", "provenance", "config_hash"},
            {}};
    for (const auto &d : b.datasets) {
        for (const auto &m : d.models) {
            if (!m.method3) {
                continue;
            }
            for (const auto &o : m.method3->outcomes) {
                t.rows.push_back({d.dataset, m.model_id, o.topic, o.country_x, o.country_y,
                                  analysis::to_string(o.truth), analysis::to_string(o.predicted),
                                  format_fixed(o.score, 4), m.provenance, b.config_hash});
            }
        }
    }
    return t;
}

Table plot_table(const Bundle &b) {
    Table t{"plot_variance_long", {"dataset", "topic", "source", "variance"}, {}};
    for (const auto &d : b.datasets) {
        for (const auto &r : d.all_topics) {
            t.rows.push_back({d.dataset, r.topic, "empirical", metric(r.variance)});
        }
        for (const auto &m : d.models) {
            if (!m.method1) {
                continue;
            }
            for (const auto &r : m.method1->rows) {
                t.rows.push_back({d.dataset, r.topic, m.model_id, metric(r.model_variance)});
            }
        }
    }
    return t;
}

std::string to_csv(const Table &table) {
    std::ostringstream out;
    csv::write_row(out, table.header);
    for (const auto &row : table.rows) {
        csv::write_row(out, row);
    }
    return out.str();
}

std::string to_markdown(const Table &table) {
    std::ostringstream out;
    out << "### " << table.name << "\n\n|";
    for (const auto &h : table.header) {
        out << ' ' << md_cell(h) << " |";
    }
    out << "\n|";
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        out << " --- |";
    }
    out << '\n';
    for (const auto &row : table.rows) {
        out << '|';
        for (const auto &cell : row) {
            out << ' ' << md_cell(cell) << " |";
        }
        out << '\n';
    }
    if (table.rows.empty()) {
        out << "\n(no rows)\n";
    }
    return out.str();
}

void write_bundle(const fs::path &dir, const Bundle &bundle) {
    fs::create_directories(dir);
    auto tables = build_tables(bundle);
    tables.push_back(probe_outcome_table(bundle));
    tables.push_back(plot_table(bundle));
    for (const auto &t : tables) {
        write_text(dir / (t.name + ".csv"), to_csv(t));
        write_text(dir / (t.name + ".md"), to_markdown(t));
    }

    std::ostringstream s;
    s << "# Report summary\n\n";
    s << "- config_hash: `" << bundle.config_hash << "`\n";
    s << "- seed: " << bundle.seed << "\n";
    s << "- positive_class: " << bundle.positive_class << "\n";
    for (const auto &[key, value] : bundle.settings) {
        s << "- " << key << ": " << value << "\n";
    }
    for (const auto &d : bundle.datasets) {
        s << "- dataset " << d.dataset << ": " << d.all_topics.size() << " topics\n";
        for (const auto &m : d.models) {
            s << "  - model " << m.model_id << ": " << m.provenance << "\n";
            for (const auto &note : m.notes) {
                s << "    - " << note << "\n";
            }
        }
    }
    if (!bundle.coverage_warnings.empty()) {
        s << "\n## Coverage warning\n\n"
          << "Some cells or probes had no cached score. Tables cover only the scored part of "
             "the grid.\n\n";
        for (const auto &w : bundle.coverage_warnings) {
            s << "- " << w << "\n";
        }
    }
    write_text(dir / "summary.md", s.str());
}

} // namespace moralprobe::report
