#pragma once

#include <string>
#include <vector>

namespace didc {

// A two-sided slice of the panel: centered running variable paired with an
// outcome (a level in one period, or a first difference).
struct CrossSection {
  std::vector<double> z;  // running variable minus the cutoff
  std::vector<double> y;

  std::size_t size() const { return z.size(); }
  int count_above() const;
  int count_below() const;
};

// Column names in the input CSV.
struct ColumnSchema {
  std::string unit = "unit";
  std::string period = "period";
  std::string outcome = "y";
  std::string running = "z";
};

// Balanced panel with a time-invariant running variable per unit. Units with
// z exactly at the cutoff belong to the treated side unless
// treat_cutoff_as_above is cleared. Immutable after construction.
class PanelDataset {
 public:
  PanelDataset(std::vector<std::string> unit_ids, std::vector<double> z,
               std::vector<std::string> period_order,
               std::vector<std::vector<double>> outcomes,  // [period][unit]
               double cutoff, bool treat_cutoff_as_above = true);

  std::size_t n_units() const { return z_.size(); }
  std::size_t n_periods() const { return period_order_.size(); }
  const std::vector<std::string>& unit_ids() const { return unit_ids_; }
  const std::vector<double>& running() const { return z_; }
  const std::vector<std::string>& period_order() const { return period_order_; }
  double cutoff() const { return cutoff_; }
  bool treat_cutoff_as_above() const { return treat_cutoff_as_above_; }
  bool treated(std::size_t unit) const {
    return treat_cutoff_as_above_ ? z_[unit] >= cutoff_ : z_[unit] > cutoff_;
  }

  int period_index(const std::string& label) const;  // throws on unknown label
  const std::vector<double>& outcomes(const std::string& period) const;

 private:
  std::vector<std::string> unit_ids_;
  std::vector<double> z_;
  std::vector<std::string> period_order_;
  std::vector<std::vector<double>> outcomes_;
  double cutoff_ = 0.0;
  bool treat_cutoff_as_above_ = true;
};

// Reads a long-format CSV (one row per unit x period, header required).
// When `period_order` is empty the distinct labels are ordered numerically
// if they all parse as numbers, lexicographically otherwise.
PanelDataset load_panel(const std::string& path, const ColumnSchema& schema,
                        double cutoff,
                        std::vector<std::string> period_order = {},
                        bool treat_cutoff_as_above = true);

// Delta Y = Y_{t1} - Y_{t0} against centered z; t1 must come after t0.
CrossSection first_difference(const PanelDataset& panel, const std::string& t1,
                              const std::string& t0);

CrossSection slice_period(const PanelDataset& panel, const std::string& t);

}  // namespace didc
