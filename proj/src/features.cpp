#include "survfuse/features.hpp"

#include <cmath>
#include <set>

#include "survfuse/error.hpp"
#include "survfuse/io.hpp"

namespace survfuse {

FeatureTable::FeatureTable(std::vector<std::string> sample_ids, std::vector<ColumnName> columns,
                           Matrix values)
    : sample_ids_(std::move(sample_ids)), columns_(std::move(columns)), values_(std::move(values)) {
    if (values_.rows() != static_cast<Eigen::Index>(sample_ids_.size())) {
        throw ValidationError("feature table: row count does not match sample ids");
    }
    if (values_.cols() != static_cast<Eigen::Index>(columns_.size())) {
        throw ValidationError("feature table: column count does not match names");
    }
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        if (!row_of_.emplace(sample_ids_[i], i).second) {
            throw ValidationError("duplicate sample_id " + sample_ids_[i]);
        }
    }
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
        if (!col_of_.emplace(columns_[j].key(), j).second) {
            throw ValidationError("duplicate column " + columns_[j].key());
        }
    }
    if (!values_.allFinite()) throw ValidationError("feature table contains NaN or inf");
}

std::vector<std::string> FeatureTable::column_keys() const {
    std::vector<std::string> keys;
    keys.reserve(columns_.size());
    for (const auto& c : columns_) keys.push_back(c.key());
    return keys;
}

std::optional<Eigen::Index> FeatureTable::column_index(std::string_view key) const {
    auto it = col_of_.find(key);
    if (it == col_of_.end()) return std::nullopt;
    return it->second;
}

std::optional<Eigen::Index> FeatureTable::row_index(std::string_view sample_id) const {
    auto it = row_of_.find(sample_id);
    if (it == row_of_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> FeatureTable::blocks() const {
    std::vector<std::string> out;
    for (const auto& c : columns_) {
        if (std::find(out.begin(), out.end(), c.block) == out.end()) out.push_back(c.block);
    }
    return out;
}

std::vector<Eigen::Index> FeatureTable::row_indices(const std::vector<std::string>& ids) const {
    std::vector<Eigen::Index> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto r = row_index(id);
        if (!r) throw ValidationError("sample " + id + " has no feature row");
        out.push_back(*r);
    }
    return out;
}

FeatureTable FeatureTable::select_rows(const std::vector<std::string>& ids) const {
    const auto idx = row_indices(ids);
    Matrix out(static_cast<Eigen::Index>(idx.size()), values_.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = values_.row(idx[i]);
    return FeatureTable(ids, columns_, std::move(out));
}

FeatureTable FeatureTable::select_columns(const std::vector<std::string>& keys) const {
    Matrix out(values_.rows(), static_cast<Eigen::Index>(keys.size()));
    std::vector<ColumnName> names;
    names.reserve(keys.size());
    for (std::size_t k = 0; k < keys.size(); ++k) {
        auto j = column_index(keys[k]);
        if (!j) throw ValidationError("unknown column " + keys[k]);
        out.col(static_cast<Eigen::Index>(k)) = values_.col(*j);
        names.push_back(columns_[*j]);
    }
    return FeatureTable(sample_ids_, std::move(names), std::move(out));
}

FeatureTable FeatureTable::select_blocks(const std::vector<std::string>& wanted) const {
    std::vector<std::string> keys;
    for (const auto& b : wanted) {
        bool found = false;
        for (const auto& c : columns_) {
            if (c.block == b) {
                keys.push_back(c.key());
                found = true;
            }
        }
        if (!found) throw ValidationError("unknown block " + b);
    }
    return select_columns(keys);
}

FeatureTable parse_feature_csv(std::string_view text, const std::string& block_name) {
    const auto csv = io::parse_csv(text);
    if (csv.header.empty()) throw ValidationError("no data rows");
    if (io::trim(csv.header.front()) != "sample_id") {
        throw ValidationError("feature file must start with a sample_id column");
    }
    if (csv.rows.empty()) throw ValidationError("no data rows");
    std::vector<ColumnName> columns;
    for (std::size_t j = 1; j < csv.header.size(); ++j) {
        columns.push_back({block_name, std::string(io::trim(csv.header[j]))});
    }
    const auto n = static_cast<Eigen::Index>(csv.rows.size());
    const auto p = static_cast<Eigen::Index>(columns.size());
    Matrix values(n, p);
    std::vector<std::string> ids;
    ids.reserve(csv.rows.size());
    std::set<std::string, std::less<>> seen;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = csv.rows[i];
        const auto rownum = std::to_string(i + 1);
        if (static_cast<Eigen::Index>(row.size()) != p + 1) {
            throw ValidationError("wrong field count at row " + rownum);
        }
        std::string id(io::trim(row[0]));
        if (id.empty()) throw ValidationError("empty sample_id at row " + rownum);
        if (!seen.insert(id).second) {
            throw ValidationError("duplicate sample_id " + id + " at row " + rownum);
        }
        for (Eigen::Index j = 0; j < p; ++j) {
            auto v = io::parse_double(row[j + 1]);
            if (!v) {
                throw ValidationError("non-numeric cell '" + row[j + 1] + "' at row " + rownum +
                                      ", column " + columns[j].name);
            }
            if (!std::isfinite(*v)) {
                throw ValidationError("non-finite value at row " + rownum + ", column " +
                                      columns[j].name);
            }
            values(i, j) = *v;
        }
        ids.push_back(std::move(id));
    }
    return FeatureTable(std::move(ids), std::move(columns), std::move(values));
}

FeatureTable load_feature_table(const std::filesystem::path& path, const std::string& block_name) {
    return parse_feature_csv(io::read_text(path), block_name);
}

std::string feature_table_to_csv(const FeatureTable& table) {
    std::string out = "sample_id";
    for (const auto& c : table.columns()) {
        out += ',';
        out += io::csv_escape(c.name);
    }
    out += '\n';
    const auto& v = table.values();
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        out += io::csv_escape(table.sample_ids()[i]);
        for (Eigen::Index j = 0; j < v.cols(); ++j) {
            out += ',';
            out += io::format_double(v(i, j));
        }
        out += '\n';
    }
    return out;
}

FeatureTable fuse_concat(const std::vector<FeatureTable>& tables) {
    if (tables.empty()) throw ValidationError("nothing to fuse");
    const auto& first = tables.front();
    const auto& ids = first.sample_ids();
    Eigen::Index width = 0;
    for (const auto& t : tables) {
        if (t.rows() != first.rows()) throw ValidationError("sample_id mismatch between tables");
        for (const auto& id : ids) {
            if (!t.row_index(id)) {
                throw ValidationError("sample_id mismatch between tables: " + id);
            }
        }
        width += t.cols();
    }
    Matrix values(first.rows(), width);
    std::vector<ColumnName> columns;
    columns.reserve(static_cast<std::size_t>(width));
    Eigen::Index offset = 0;
    for (const auto& t : tables) {
        const auto rows = t.row_indices(ids);
        for (Eigen::Index i = 0; i < first.rows(); ++i) {
            values.block(i, offset, 1, t.cols()) = t.values().row(rows[i]);
        }
        columns.insert(columns.end(), t.columns().begin(), t.columns().end());
        offset += t.cols();
    }
    return FeatureTable(ids, std::move(columns), std::move(values));
}

StandardizationParams fit_standardizer(const FeatureTable& table,
                                       const std::vector<std::string>& rows,
                                       const std::vector<std::string>& blocks) {
    if (rows.empty()) throw ValidationError("cannot fit standardizer on an empty subset");
    const auto idx = table.row_indices(rows);
    const auto& v = table.values();
    const double n = static_cast<double>(idx.size());
    StandardizationParams params;
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
        const auto& col = table.columns()[j];
        if (!blocks.empty() && std::find(blocks.begin(), blocks.end(), col.block) == blocks.end()) {
            continue;
        }
        double sum = 0.0;
        for (auto i : idx) sum += v(i, j);
        const double mean = sum / n;
        double ss = 0.0;
        for (auto i : idx) ss += (v(i, j) - mean) * (v(i, j) - mean);
        const double sd = std::sqrt(ss / n);
        const bool constant = !(sd > 0.0);
        params.keys.push_back(col.key());
        params.mean.push_back(mean);
        params.std.push_back(constant ? 1.0 : sd);
        params.constant.push_back(constant);
    }
    return params;
}

namespace {

FeatureTable transform(const FeatureTable& table, const StandardizationParams& params,
                       bool inverse) {
    Matrix values = table.values();
    for (std::size_t k = 0; k < params.keys.size(); ++k) {
        auto j = table.column_index(params.keys[k]);
        if (!j) throw ValidationError("unknown column " + params.keys[k]);
        if (inverse) {
            values.col(*j) = (values.col(*j).array() * params.std[k] + params.mean[k]).matrix();
        } else {
            values.col(*j) = ((values.col(*j).array() - params.mean[k]) / params.std[k]).matrix();
        }
    }
    return FeatureTable(table.sample_ids(), table.columns(), std::move(values));
}

}  // namespace

FeatureTable apply_standardizer(const FeatureTable& table, const StandardizationParams& params) {
    return transform(table, params, false);
}

FeatureTable invert_standardizer(const FeatureTable& table, const StandardizationParams& params) {
    return transform(table, params, true);
}

nlohmann::ordered_json to_json(const StandardizationParams& params) {
    nlohmann::ordered_json j;
    j["keys"] = params.keys;
    j["mean"] = params.mean;
    j["std"] = params.std;
    j["constant"] = params.constant;
    return j;
}

StandardizationParams standardizer_from_json(const nlohmann::json& j) {
    StandardizationParams p;
    p.keys = j.at("keys").get<std::vector<std::string>>();
    p.mean = j.at("mean").get<std::vector<double>>();
    p.std = j.at("std").get<std::vector<double>>();
    p.constant = j.at("constant").get<std::vector<bool>>();
    if (p.mean.size() != p.keys.size() || p.std.size() != p.keys.size() ||
        p.constant.size() != p.keys.size()) {
        throw ValidationError("standardizer: inconsistent lengths");
    }
    return p;
}

double pearson(const Matrix& values, Eigen::Index a, Eigen::Index b,
               const std::vector<Eigen::Index>& rows) {
    const double n = static_cast<double>(rows.size());
    double ma = 0.0, mb = 0.0;
    for (auto i : rows) {
        ma += values(i, a);
        mb += values(i, b);
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (auto i : rows) {
        const double da = values(i, a) - ma;
        const double db = values(i, b) - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

SelectionMask select_by_correlation(const FeatureTable& table,
                                    const std::vector<std::string>& rows, double threshold) {
    if (!(threshold > 0.0) || std::isnan(threshold)) {
        throw ValidationError("correlation threshold must be positive");
    }
    if (rows.size() < 3) throw ValidationError("need at least 3 rows to compute correlations");
    SelectionMask mask;
    mask.threshold = threshold;
    if (threshold >= 1.0) {
        mask.retained = table.column_keys();
        return mask;
    }

    // Centred, unit-norm columns over the subset; correlations become dot products.
    const auto idx = table.row_indices(rows);
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd z(n, table.cols());
    for (Eigen::Index k = 0; k < n; ++k) z.row(k) = table.values().row(idx[k]);
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        z.col(j).array() -= z.col(j).mean();
        const double norm = z.col(j).norm();
        if (norm > 0.0) {
            z.col(j) /= norm;
        } else {
            z.col(j).setZero();
        }
    }

    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        bool keep = true;
        for (auto k : kept) {
            if (std::abs(z.col(j).dot(z.col(k))) >= threshold) {
                keep = false;
                break;
            }
        }
        if (keep) kept.push_back(j);
    }
    for (auto j : kept) mask.retained.push_back(table.columns()[j].key());
    return mask;
}

FeatureTable apply_selection(const FeatureTable& table, const SelectionMask& mask) {
    return table.select_columns(mask.retained);
}

nlohmann::ordered_json to_json(const SelectionMask& mask) {
    nlohmann::ordered_json j;
    j["threshold"] = mask.threshold;
    j["retained"] = mask.retained;
    return j;
}

SelectionMask selection_from_json(const nlohmann::json& j) {
    SelectionMask m;
    m.threshold = j.at("threshold").get<double>();
    m.retained = j.at("retained").get<std::vector<std::string>>();
    return m;
}

}  // namespace survfuse
