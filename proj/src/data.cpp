#include "relrisk/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace relrisk {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool parse_number(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const char* begin = t.data();
    const char* end = begin + t.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

// One CSV record, honoring quotes; returns false on EOF with nothing read.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false, any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        any = true;
        char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (!any) return false;
    fields.push_back(field);
    return true;
}

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n\r") != std::string::npos;
}

TermFactor parse_factor(const std::string& text) {
    TermFactor f;
    std::string t = trim(text);
    if (auto slash = t.find('/'); slash != std::string::npos) {
        double k;
        if (!parse_number(t.substr(slash + 1), k) || k == 0.0)
            throw ValidationError("bad term scale in '" + text + "'");
        f.scale = k;
        t = trim(t.substr(0, slash));
    }
    if (auto caret = t.find('^'); caret != std::string::npos) {
        const std::string pw = trim(t.substr(caret + 1));
        if (pw != "2") throw ValidationError("unsupported power in term '" + text + "'");
        f.power = 2;
        t = trim(t.substr(0, caret));
    }
    if (t.empty()) throw ValidationError("empty column name in term '" + text + "'");
    f.column = t;
    return f;
}

Vector factor_values(const Table& table, const TermFactor& f) {
    Vector v = table.numeric(f.column);
    if (f.power == 2) v = v.array().square().matrix();
    if (f.scale != 1.0) v /= f.scale;
    return v;
}

bool numeric_labels(const std::vector<std::string>& labels) {
    double x;
    return std::all_of(labels.begin(), labels.end(),
                       [&](const std::string& s) { return parse_number(s, x); });
}

}  // namespace

// --- Table -----------------------------------------------------------------

bool Table::has(const std::string& name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::size_t Table::column_index(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw SchemaError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

const std::vector<std::string>& Table::raw(const std::string& name) const {
    return cells[column_index(name)];
}

Vector Table::numeric(const std::string& name) const {
    const auto& col = raw(name);
    Vector out(static_cast<Index>(col.size()));
    for (std::size_t i = 0; i < col.size(); ++i) {
        double x;
        if (!parse_number(col[i], x))
            throw ParseError("non-numeric cell '" + col[i] + "' in column '" + name +
                             "' at data row " + std::to_string(i + 1));
        out[static_cast<Index>(i)] = x;
    }
    return out;
}

Table Table::select_rows(const std::vector<std::size_t>& idx) const {
    Table out;
    out.columns = columns;
    out.cells.resize(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
        out.cells[j].reserve(idx.size());
        for (std::size_t i : idx) out.cells[j].push_back(cells[j][i]);
    }
    return out;
}

Table read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    Table t;
    std::vector<std::string> fields;
    if (!read_record(in, fields) || fields.empty())
        throw ValidationError("missing header row in " + path);
    t.columns = fields;
    t.cells.resize(t.columns.size());
    std::size_t row = 0;
    while (read_record(in, fields)) {
        ++row;
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (fields.size() != t.columns.size())
            throw ParseError("row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(t.columns.size()));
        for (std::size_t j = 0; j < fields.size(); ++j) t.cells[j].push_back(fields[j]);
    }
    return t;
}

void write_csv(const Table& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open file for writing: " + path);
    auto emit = [&](const std::string& s) {
        if (!needs_quoting(s)) {
            out << s;
            return;
        }
        out << '"';
        for (char c : s) {
            if (c == '"') out << '"';
            out << c;
        }
        out << '"';
    };
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (j) out << ',';
        emit(table.columns[j]);
    }
    out << '\n';
    for (std::size_t i = 0; i < table.rows(); ++i) {
        for (std::size_t j = 0; j < table.columns.size(); ++j) {
            if (j) out << ',';
            emit(table.cells[j][i]);
        }
        out << '\n';
    }
}

std::string format_double(double x) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

// --- Terms and designs -------------------------------------------------------

std::vector<Term> parse_terms(const std::string& spec) {
    std::vector<Term> terms;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
        token = trim(token);
        if (token.empty()) throw ValidationError("empty term in spec '" + spec + "'");
        Term term;
        term.label = token;
        if (token == "1") {
            term.kind = Term::Kind::Intercept;
        } else if (auto star = token.find('*'); star != std::string::npos) {
            term.kind = Term::Kind::Product;
            term.a = parse_factor(token.substr(0, star));
            term.b = parse_factor(token.substr(star + 1));
        } else {
            term.kind = Term::Kind::Single;
            term.a = parse_factor(token);
        }
        terms.push_back(std::move(term));
    }
    if (terms.empty()) throw ValidationError("empty term list");
    return terms;
}

std::string terms_to_string(const std::vector<Term>& terms) {
    std::string out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) out += ',';
        out += terms[i].label;
    }
    return out;
}

Matrix build_design(const Table& table, const std::vector<Term>& terms) {
    if (terms.empty()) throw ValidationError("empty term list");
    std::set<std::string> seen;
    for (std::size_t j = 0; j < terms.size(); ++j) {
        if (!seen.insert(terms[j].label).second)
            throw ValidationError("duplicate term '" + terms[j].label + "'");
        if (terms[j].kind == Term::Kind::Intercept && j != 0)
            throw ValidationError("intercept term must be declared first");
    }
    const Index n = static_cast<Index>(table.rows());
    Matrix design(n, static_cast<Index>(terms.size()));
    for (std::size_t j = 0; j < terms.size(); ++j) {
        const Term& t = terms[j];
        Vector col;
        switch (t.kind) {
            case Term::Kind::Intercept:
                col = Vector::Ones(n);
                break;
            case Term::Kind::Single:
                col = factor_values(table, t.a);
                break;
            case Term::Kind::Product:
                col = factor_values(table, t.a).cwiseProduct(factor_values(table, t.b));
                break;
        }
        if (!col.allFinite())
            throw ValidationError("non-finite value in design column '" + t.label + "'");
        design.col(static_cast<Index>(j)) = col;
    }
    return design;
}

// --- Treatment coding --------------------------------------------------------

double TreatmentCoding::transform(double z) const {
    if (f_transform == "identity" || kind == TreatmentKind::Categorical) return z;
    if (f_transform == "logistic") return 1.0 / (1.0 + std::exp(-z));
    if (f_transform == "tanh") return std::tanh(z);
    throw ValidationError("unknown treatment transform '" + f_transform + "'");
}

void TreatmentCoding::validate() const {
    if (kind == TreatmentKind::Categorical) {
        if (K < 1) throw ValidationError("categorical treatment needs at least two levels");
        if (z0 != 0.0) throw ValidationError("categorical baseline must be recoded to 0");
        return;
    }
    if (!(z_min < z_max)) throw ValidationError("treatment range requires z_min < z_max");
    if (z0 < z_min || z0 > z_max)
        throw ValidationError("baseline treatment outside [z_min, z_max]");
    transform(z0);  // rejects unknown transform ids
}

// --- Dataset -----------------------------------------------------------------

void Dataset::validate(const TreatmentCoding* coding) const {
    const Index m = n();
    if (m == 0) throw ValidationError("empty dataset");
    if (z.size() != m || v_rr.rows() != m || v_op.rows() != m)
        throw ValidationError("dataset fields have inconsistent row counts");
    for (Index i = 0; i < m; ++i) {
        if (y[i] != 0.0 && y[i] != 1.0)
            throw ValidationError("outcome must be 0 or 1 (data row " + std::to_string(i + 1) +
                                  ")");
    }
    if (!z.allFinite() || !v_rr.allFinite() || !v_op.allFinite())
        throw ValidationError("non-finite entries in dataset");
    if (!coding) return;
    if (coding->kind == TreatmentKind::Categorical) {
        std::vector<bool> present(static_cast<std::size_t>(coding->K) + 1, false);
        for (Index i = 0; i < m; ++i) {
            const double zi = z[i];
            if (zi != std::floor(zi) || zi < 0 || zi > coding->K)
                throw ValidationError("categorical treatment value out of range (data row " +
                                      std::to_string(i + 1) + ")");
            present[static_cast<std::size_t>(zi)] = true;
        }
        for (std::size_t k = 0; k < present.size(); ++k)
            if (!present[k])
                throw ValidationError("treatment level " + std::to_string(k) +
                                      " has no observations");
    } else {
        for (Index i = 0; i < m; ++i)
            if (z[i] < coding->z_min || z[i] > coding->z_max)
                throw ValidationError("treatment value outside [z_min, z_max] (data row " +
                                      std::to_string(i + 1) + ")");
    }
}

// --- Loading -----------------------------------------------------------------

LoadedData make_dataset(const Table& table, const DataSchema& schema) {
    if (table.rows() == 0) throw ValidationError("empty dataset");
    LoadedData out;
    out.table = table;
    out.ds.y = table.numeric(schema.outcome);
    for (Index i = 0; i < out.ds.y.size(); ++i)
        if (out.ds.y[i] != 0.0 && out.ds.y[i] != 1.0)
            throw ValidationError("outcome column '" + schema.outcome +
                                  "' must be 0/1 (data row " + std::to_string(i + 1) + ")");
    out.ds.v_rr = build_design(table, schema.rr_terms);
    out.ds.v_op = build_design(table, schema.op_terms);

    const auto& zraw = table.raw(schema.treatment);
    const bool labels_numeric = numeric_labels(zraw);
    const bool recode = schema.treatment_kind == TreatmentKind::Categorical || !labels_numeric;

    if (recode) {
        std::set<std::string> distinct(zraw.begin(), zraw.end());
        if (distinct.size() < 2)
            throw ValidationError("treatment column has fewer than two levels");
        std::string baseline = schema.baseline_level;
        if (baseline.empty()) baseline = *distinct.begin();
        if (!distinct.count(baseline))
            throw ValidationError("baseline level '" + baseline + "' not present in data");

        std::vector<std::string> ordered(distinct.begin(), distinct.end());
        if (numeric_labels(ordered))
            std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
                double x, y2;
                parse_number(a, x);
                parse_number(b, y2);
                return x < y2;
            });
        double z0_index = 0.0;
        if (schema.treatment_kind == TreatmentKind::Categorical) {
            // baseline first, remaining levels in sorted order
            ordered.erase(std::find(ordered.begin(), ordered.end(), baseline));
            ordered.insert(ordered.begin(), baseline);
        } else {
            // keep sorted order so the index scale stays monotone
            z0_index = static_cast<double>(
                std::find(ordered.begin(), ordered.end(), baseline) - ordered.begin());
        }
        std::map<std::string, double> index;
        for (std::size_t k = 0; k < ordered.size(); ++k)
            index[ordered[k]] = static_cast<double>(k);
        out.ds.z.resize(static_cast<Index>(zraw.size()));
        for (std::size_t i = 0; i < zraw.size(); ++i)
            out.ds.z[static_cast<Index>(i)] = index[zraw[i]];
        out.level_map = ordered;

        const int K = static_cast<int>(ordered.size()) - 1;
        if (schema.treatment_kind == TreatmentKind::Categorical) {
            out.coding.kind = TreatmentKind::Categorical;
            out.coding.K = K;
            out.coding.z0 = 0.0;
            out.coding.z_min = 0.0;
            out.coding.z_max = static_cast<double>(K);
        } else {
            out.coding.kind = TreatmentKind::BoundedContinuous;
            out.coding.z_min = 0.0;
            out.coding.z_max = static_cast<double>(K);
            out.coding.z0 = z0_index;
            out.coding.f_transform = schema.f_transform;
        }
    } else {
        out.ds.z = table.numeric(schema.treatment);
        out.coding.kind = TreatmentKind::BoundedContinuous;
        out.coding.z_min = schema.z_min.value_or(out.ds.z.minCoeff());
        out.coding.z_max = schema.z_max.value_or(out.ds.z.maxCoeff());
        out.coding.f_transform = schema.f_transform;
        if (schema.baseline_level.empty()) {
            out.coding.z0 = out.coding.z_min;
        } else {
            double z0;
            if (!parse_number(schema.baseline_level, z0))
                throw ParseError("baseline level '" + schema.baseline_level +
                                 "' is not numeric");
            out.coding.z0 = z0;
        }
    }
    out.coding.validate();
    out.ds.validate(&out.coding);
    return out;
}

LoadedData load_csv(const std::string& path, const DataSchema& schema) {
    return make_dataset(read_csv(path), schema);
}

// --- Group rates ---------------------------------------------------------------

std::vector<GroupRate> empirical_rates(const Table& table, const std::string& outcome,
                                       const std::vector<std::string>& by) {
    if (by.empty()) throw ValidationError("empirical_rates: no grouping columns");
    const Vector y = table.numeric(outcome);
    std::vector<const std::vector<std::string>*> keys;
    keys.reserve(by.size());
    for (const auto& name : by) keys.push_back(&table.raw(name));

    std::map<std::vector<std::string>, std::pair<double, std::size_t>> groups;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        std::vector<std::string> key;
        key.reserve(by.size());
        for (const auto* col : keys) key.push_back((*col)[i]);
        auto& acc = groups[key];
        acc.first += y[static_cast<Index>(i)];
        acc.second += 1;
    }
    std::vector<GroupRate> out;
    out.reserve(groups.size());
    for (const auto& [key, acc] : groups)
        out.push_back({key, acc.first / static_cast<double>(acc.second), acc.second});
    return out;
}

}  // namespace relrisk
