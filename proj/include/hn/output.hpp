#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hn/dynamics.hpp"
#include "hn/sweep.hpp"
#include "hn/topology.hpp"

namespace hn {

/// Shortest decimal string that parses back to the same double.
std::string format_number(double x);

/// Quotes a CSV field when it contains a separator, quote or newline.
std::string csv_field(const std::string& s);

/// Splits one CSV line, honoring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

// Spectra: index,re,im
void write_spectrum_csv(std::ostream& os, const CVector& eigenvalues);
void write_spectrum_json(std::ostream& os, const CVector& eigenvalues);

// Sweep records
inline constexpr const char* kRecordHeader = "L,N,g,V,W,theta0,bc,sample,quantity,index,value,warnings";
void write_record_header(std::ostream& os);
void write_record_csv(std::ostream& os, const ResultRecord& r);
void write_records_json(std::ostream& os, const std::vector<ResultRecord>& records);

/// Grid points of an existing record CSV whose averages cover every quantity in `wanted`.
std::set<std::string> completed_points(std::istream& in, const std::set<Quantity>& wanted);

/// Copies the header and the rows of points in `keep`, dropping partial points of an
/// interrupted run. Returns the number of rows kept.
std::size_t retain_points(std::istream& in, std::ostream& out, const std::set<std::string>& keep);

// Winding rows: W,g,nu,raw_phase_over_2pi,warnings
inline constexpr const char* kWindingHeader = "W,g,nu,raw_phase_over_2pi,warnings";
void write_winding_row(std::ostream& os, double W, double g, const WindingResult& w);

// Time series: t,observable,index,value (index empty for scalars)
inline constexpr const char* kSeriesHeader = "t,observable,index,value";
void write_series_row(std::ostream& os, const ObservableRecord& r);

// Long-format heatmap: t,site,value
inline constexpr const char* kHeatmapHeader = "t,site,value";
void write_heatmap(std::ostream& os, const std::vector<std::pair<double, RVector>>& rows);

/// Flat JSON object of string values.
void write_metadata_json(const std::string& path, const std::map<std::string, std::string>& meta);

}  // namespace hn
