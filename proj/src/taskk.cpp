#include "prefopt/taskk.hpp"

#include <algorithm>
#include <sstream>

#include "prefopt/errors.hpp"
#include "prefopt/harness.hpp"
#include "prefopt/io.hpp"

namespace prefopt {

double task_at_k(int n, int c, int k) {
  if (n < 1) throw DomainError("task_at_k: n must be >= 1, got " + std::to_string(n));
  if (c < 0 || c > n)
    throw DomainError("task_at_k: c must lie in [0, n], got c=" + std::to_string(c) + " n=" + std::to_string(n));
  if (k < 1 || k > n)
    throw DomainError("task_at_k: k must lie in [1, n], got k=" + std::to_string(k) + " n=" + std::to_string(n));
  if (n - c < k) return 1.0;
  double miss = 1.0;
  for (int i = n - c + 1; i <= n; ++i) miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
  return 1.0 - miss;
}

MetricCounts derive_counts(std::span<const EvalRecord> records, std::optional<Gas> reference_gas,
                           Severity severity_threshold, SecureCounting secure_counting) {
  MetricCounts m;
  m.n = static_cast<int>(records.size());
  m.gas_excluded = !reference_gas.has_value();
  for (const auto& r : records) {
    if (r.compiled) ++m.c_compile;
    if (r.passed) ++m.c_pass;
    if (reference_gas && r.passed && r.gas && *r.gas < *reference_gas) ++m.c_gas;
    const bool eligible = secure_counting == SecureCounting::all_samples || r.compiled;
    if (eligible && classify_secure(r.findings, severity_threshold)) ++m.c_secure;
  }
  return m;
}

std::map<std::string, MetricCounts> count_by_problem(const std::vector<Problem>& problems,
                                                     const std::vector<Candidate>& candidates,
                                                     const std::vector<EvalRecord>& evals,
                                                     Severity severity_threshold, SecureCounting secure_counting,
                                                     Exec exec) {
  std::map<std::string, std::string> problem_of;
  for (const auto& c : candidates) problem_of.emplace(c.id, c.problem_id);

  std::map<std::string, std::vector<EvalRecord>> groups;
  for (const auto& e : evals) {
    auto it = problem_of.find(e.candidate_id);
    if (it == problem_of.end())
      throw DataError(DataError::Kind::reference, {}, 0, "eval record references unknown candidate '" + e.candidate_id + "'");
    groups[it->second].push_back(e);
  }

  std::map<std::string, std::optional<Gas>> reference;
  for (const auto& p : problems) reference.emplace(p.id, p.reference_gas);

  std::vector<std::pair<std::string, const std::vector<EvalRecord>*>> work;
  for (const auto& [pid, recs] : groups) {
    if (!reference.contains(pid))
      throw DataError(DataError::Kind::reference, {}, 0, "candidates reference unknown problem '" + pid + "'");
    work.emplace_back(pid, &recs);
  }

  std::vector<MetricCounts> counts(work.size());
  const auto count = static_cast<long>(work.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i)
      counts[i] = derive_counts(*work[i].second, reference.at(work[i].first), severity_threshold, secure_counting);
  } else {
    for (long i = 0; i < count; ++i)
      counts[i] = derive_counts(*work[i].second, reference.at(work[i].first), severity_threshold, secure_counting);
  }

  std::map<std::string, MetricCounts> out;
  for (std::size_t i = 0; i < work.size(); ++i) out.emplace(work[i].first, counts[i]);
  return out;
}

MetricReport aggregate(const std::map<std::string, MetricCounts>& problem_counts, std::span<const int> k_values,
                       SecureCounting secure_counting, Exec exec) {
  MetricReport report;
  report.k_values.assign(k_values.begin(), k_values.end());
  report.secure_counting = secure_counting;
  report.problem_count = problem_counts.size();

  std::vector<std::pair<const std::string*, const MetricCounts*>> problems;
  for (const auto& [pid, m] : problem_counts) {
    for (int k : k_values) {
      if (k < 1 || k > m.n)
        throw DomainError("k=" + std::to_string(k) + " is not in [1, n] for problem '" + pid +
                          "' (n=" + std::to_string(m.n) + ")");
    }
    problems.emplace_back(&pid, &m);
    if (m.gas_excluded) report.problems_excluded_from_gas.push_back(pid);
  }

  const std::size_t nk = k_values.size();
  report.per_problem.resize(problems.size() * nk);
  auto fill = [&](long i) {
    const auto& [pid, m] = problems[i];
    for (std::size_t j = 0; j < nk; ++j) {
      const int k = k_values[j];
      MetricRow& row = report.per_problem[i * nk + j];
      row.problem_id = *pid;
      row.k = k;
      row.pass = task_at_k(m->n, m->c_pass, k);
      row.compile = task_at_k(m->n, m->c_compile, k);
      if (!m->gas_excluded) row.gas = task_at_k(m->n, m->c_gas, k);
      row.secure = task_at_k(m->n, m->c_secure, k);
    }
  };
  const auto count = static_cast<long>(problems.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for
    for (long i = 0; i < count; ++i) fill(i);
  } else {
    for (long i = 0; i < count; ++i) fill(i);
  }

  if (problems.empty()) return report;

  // Fold in problem-id order so the means are bit-reproducible.
  for (std::size_t j = 0; j < nk; ++j) {
    MetricRow all;
    all.problem_id = "ALL";
    all.k = k_values[j];
    double gas_sum = 0.0;
    std::size_t gas_n = 0;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      const MetricRow& row = report.per_problem[i * nk + j];
      all.pass += row.pass;
      all.compile += row.compile;
      all.secure += row.secure;
      if (row.gas) {
        gas_sum += *row.gas;
        ++gas_n;
      }
    }
    const auto denom = static_cast<double>(problems.size());
    all.pass /= denom;
    all.compile /= denom;
    all.secure /= denom;
    if (gas_n > 0) all.gas = gas_sum / static_cast<double>(gas_n);
    report.aggregate.push_back(all);
  }
  return report;
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_fixed(*v) : std::string("NA"); }

}  // namespace

std::string render_csv(const MetricReport& report) {
  std::ostringstream out;
  out << "problem_id,k,pass,compile,gas,secure\n";
  auto emit = [&](const MetricRow& r) {
    out << r.problem_id << ',' << r.k << ',' << format_fixed(r.pass) << ',' << format_fixed(r.compile) << ','
        << cell(r.gas) << ',' << format_fixed(r.secure) << '\n';
  };
  for (const auto& r : report.per_problem) emit(r);
  for (const auto& r : report.aggregate) emit(r);
  return out.str();
}

std::string render_table(const MetricReport& report) {
  std::ostringstream out;
  out << "# problems: " << report.problem_count << '\n'
      << "# secure counting: " << to_string(report.secure_counting) << '\n'
      << "# excluded from Gas@k:";
  if (report.problems_excluded_from_gas.empty()) out << " none";
  for (const auto& id : report.problems_excluded_from_gas) out << ' ' << id;
  out << '\n';
  if (report.problem_count == 0) {
    out << "no data\n";
    return out.str();
  }

  std::vector<std::vector<std::string>> rows{{"problem_id", "k", "pass", "compile", "gas", "secure"}};
  auto add = [&](const MetricRow& r) {
    rows.push_back({r.problem_id, std::to_string(r.k), format_fixed(r.pass), format_fixed(r.compile), cell(r.gas),
                    format_fixed(r.secure)});
  };
  for (const auto& r : report.per_problem) add(r);
  for (const auto& r : report.aggregate) add(r);

  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << "  ";
      if (i == 0) {
        out << row[i] << std::string(width[i] - row[i].size(), ' ');
      } else {
        out << std::string(width[i] - row[i].size(), ' ') << row[i];
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace prefopt
