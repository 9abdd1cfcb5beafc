#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relrisk/types.hpp"

namespace relrisk {

// ---------------------------------------------------------------------------
// Raw column table (CSV image). Cells are kept as text; numeric views are
// parsed on demand so string-valued columns (treatment labels, group keys)
// stay usable.
// ---------------------------------------------------------------------------
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> cells;  // column-major, cells[j][i]

    std::size_t rows() const { return columns.empty() ? 0 : cells.front().size(); }
    bool has(const std::string& name) const;
    std::size_t column_index(const std::string& name) const;  // throws SchemaError
    const std::vector<std::string>& raw(const std::string& name) const;
    Vector numeric(const std::string& name) const;  // throws ParseError with row index
    Table select_rows(const std::vector<std::size_t>& idx) const;
};

Table read_csv(const std::string& path);
void write_csv(const Table& table, const std::string& path);

/// Full-precision text for a double (shortest round-trip form).
std::string format_double(double x);

// ---------------------------------------------------------------------------
// Design terms. Grammar (comma separated in text form):
//   1                intercept
//   col              plain column
//   col/k            column scaled by 1/k
//   col^2/k          squared column scaled by 1/k
//   colA*colB[/k]    product of two factors, second factor may carry ^2 / k
// ---------------------------------------------------------------------------
struct TermFactor {
    std::string column;
    int power = 1;      // 1 or 2
    double scale = 1.0;  // divides the value
};

struct Term {
    enum class Kind { Intercept, Single, Product };
    Kind kind = Kind::Intercept;
    TermFactor a, b;  // b only for Product
    std::string label;
};

std::vector<Term> parse_terms(const std::string& spec);
std::string terms_to_string(const std::vector<Term>& terms);

/// One column per term, in declaration order; an intercept term, if present,
/// must be declared first. Duplicate labels and unknown columns are errors.
Matrix build_design(const Table& table, const std::vector<Term>& terms);

// ---------------------------------------------------------------------------
// Treatment coding
// ---------------------------------------------------------------------------
enum class TreatmentKind { BoundedContinuous, Categorical };

struct TreatmentCoding {
    TreatmentKind kind = TreatmentKind::BoundedContinuous;
    double z0 = 0.0;
    double z_min = 0.0;
    double z_max = 1.0;
    int K = 1;  // categorical: levels are 0..K
    std::string f_transform = "identity";  // identity | logistic | tanh

    double transform(double z) const;  // f(z) per the bounded-transform id
    void validate() const;
};

// ---------------------------------------------------------------------------
// Dataset: outcome, treatment, and the two design matrices.
// ---------------------------------------------------------------------------
struct Dataset {
    Vector y;     // binary outcomes, each in {0,1}
    Vector z;     // treatment value (bounded-continuous) or level index (categorical)
    Matrix v_rr;  // n x p_rr, covariates of the relative-risk model
    Matrix v_op;  // n x p_op, covariates of the nuisance (odds-product) model

    Index n() const { return y.size(); }
    void validate(const TreatmentCoding* coding = nullptr) const;
};

struct DataSchema {
    std::string outcome;
    std::string treatment;
    std::vector<Term> rr_terms;
    std::vector<Term> op_terms;
    std::string baseline_level;  // categorical label, or numeric z0 for continuous
    TreatmentKind treatment_kind = TreatmentKind::Categorical;
    std::string f_transform = "identity";
    std::optional<double> z_min, z_max;  // bounded-continuous overrides
};

struct LoadedData {
    Dataset ds;
    TreatmentCoding coding;
    std::vector<std::string> level_map;  // index -> source label (categorical only)
    Table table;
};

/// Read, validate, and encode a CSV file per the schema. Categorical
/// treatments are recoded to contiguous 0..K with the declared baseline at 0
/// and the remaining levels in sorted label order.
LoadedData load_csv(const std::string& path, const DataSchema& schema);

/// Encode an in-memory table (same rules as load_csv).
LoadedData make_dataset(const Table& table, const DataSchema& schema);

// ---------------------------------------------------------------------------
// Group-wise event rates
// ---------------------------------------------------------------------------
struct GroupRate {
    std::vector<std::string> key;  // one value per grouping column
    double rate = 0.0;
    std::size_t count = 0;
};

/// Mean outcome within each group, keys sorted lexicographically.
std::vector<GroupRate> empirical_rates(const Table& table, const std::string& outcome,
                                       const std::vector<std::string>& by);

}  // namespace relrisk
