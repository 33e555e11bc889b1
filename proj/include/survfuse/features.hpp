#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace survfuse {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct ColumnName {
    std::string block;
    std::string name;

    // "block:name"; the identity used by standardizers, masks and checkpoints.
    std::string key() const { return block + ":" + name; }
    bool operator==(const ColumnName&) const = default;
};

// Sample-aligned numeric matrix with named columns grouped into modality blocks.
class FeatureTable {
public:
    FeatureTable() = default;
    FeatureTable(std::vector<std::string> sample_ids, std::vector<ColumnName> columns,
                 Matrix values);

    const std::vector<std::string>& sample_ids() const { return sample_ids_; }
    const std::vector<ColumnName>& columns() const { return columns_; }
    const Matrix& values() const { return values_; }
    Eigen::Index rows() const { return values_.rows(); }
    Eigen::Index cols() const { return values_.cols(); }

    std::vector<std::string> column_keys() const;
    std::optional<Eigen::Index> column_index(std::string_view key) const;
    std::optional<Eigen::Index> row_index(std::string_view sample_id) const;
    // Ordered distinct block names.
    std::vector<std::string> blocks() const;

    FeatureTable select_rows(const std::vector<std::string>& sample_ids) const;
    FeatureTable select_columns(const std::vector<std::string>& keys) const;
    FeatureTable select_blocks(const std::vector<std::string>& blocks) const;
    // Row indices for the given sample ids; throws on unknown ids.
    std::vector<Eigen::Index> row_indices(const std::vector<std::string>& sample_ids) const;

private:
    std::vector<std::string> sample_ids_;
    std::vector<ColumnName> columns_;
    Matrix values_;
    std::map<std::string, Eigen::Index, std::less<>> row_of_;
    std::map<std::string, Eigen::Index, std::less<>> col_of_;
};

// CSV with a `sample_id` column followed by numeric columns; all columns land in one block.
FeatureTable load_feature_table(const std::filesystem::path& path, const std::string& block_name);
FeatureTable parse_feature_csv(std::string_view text, const std::string& block_name);
// Header uses plain column names (no block prefix).
std::string feature_table_to_csv(const FeatureTable& table);

// Concatenates columns in argument order; row order follows the first table.
FeatureTable fuse_concat(const std::vector<FeatureTable>& tables);

struct StandardizationParams {
    std::vector<std::string> keys;  // columns covered; other columns pass through
    std::vector<double> mean;
    std::vector<double> std;        // population convention; 1.0 for constant columns
    std::vector<bool> constant;
};

// Per-column mean and population standard deviation over the given rows.
// If `blocks` is non-empty only those blocks are covered.
StandardizationParams fit_standardizer(const FeatureTable& table,
                                       const std::vector<std::string>& rows,
                                       const std::vector<std::string>& blocks = {});
FeatureTable apply_standardizer(const FeatureTable& table, const StandardizationParams& params);
FeatureTable invert_standardizer(const FeatureTable& table, const StandardizationParams& params);

nlohmann::ordered_json to_json(const StandardizationParams& params);
StandardizationParams standardizer_from_json(const nlohmann::json& j);

struct SelectionMask {
    double threshold = 1.0;
    std::vector<std::string> retained;  // column keys, in table order
};

// Greedy forward pass in column order: a column is kept iff its absolute Pearson
// correlation with every already-kept column is strictly below `threshold`.
// A threshold of 1 or more keeps everything. Zero-variance columns correlate 0.
SelectionMask select_by_correlation(const FeatureTable& table,
                                    const std::vector<std::string>& rows, double threshold);
FeatureTable apply_selection(const FeatureTable& table, const SelectionMask& mask);

// Pearson correlation of two columns over the given row indices (0 if either is constant).
double pearson(const Matrix& values, Eigen::Index a, Eigen::Index b,
               const std::vector<Eigen::Index>& rows);

nlohmann::ordered_json to_json(const SelectionMask& mask);
SelectionMask selection_from_json(const nlohmann::json& j);

}  // namespace survfuse
