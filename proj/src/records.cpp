#include "cobandit/records.hpp"

#include <cstdio>
#include <sstream>

namespace cobandit::sim {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string slot_csv_header() {
  return "slot,device,network,exploring_unheard,gain_scaled,comm_mode,argmax_network,"
         "max_prob,switched,switch_delay_s,allocation,distance_pct";
}

std::string slot_csv_rows(const SlotRecord& record) {
  std::string allocation;
  for (size_t i = 0; i < record.allocation.size(); ++i) {
    if (i > 0) allocation += ';';
    allocation += std::to_string(record.allocation[i]);
  }
  std::ostringstream out;
  for (const auto& d : record.devices) {
    out << record.slot << ',' << d.device << ',' << d.network << ','
        << (d.exploring_unheard ? 1 : 0) << ',' << fmt(d.gain_scaled) << ',' << d.comm_mode
        << ',' << d.argmax_network << ',' << fmt(d.max_prob) << ',' << (d.switched ? 1 : 0)
        << ',' << fmt(d.switch_delay_s) << ',' << allocation << ',' << fmt(record.distance_pct)
        << '\n';
  }
  return out.str();
}

}  // namespace cobandit::sim
