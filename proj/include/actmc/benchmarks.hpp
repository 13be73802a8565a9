#pragma once

#include "actmc/model.hpp"

#include <string>

namespace actmc {

// Disk drive with queue capacity n: active_i / asleep_i, alarms "sleep"
// (setting state active_0) and "wakeup" (setting state asleep_1), both Dirac
// on [1/10, 10].
Model disk_drive(unsigned n);

// Server with rejuvenation and queue capacity n: alarms "o" (Dirac, setting
// state normal_0), "p" and "q" (uniform of width 2 shifted by d, setting
// states rejuven_1 and repair_1), all on [1/10, 10].  The transcription
// choices are listed in data/maintenance_n2_transcription.json.
Model maintenance(unsigned n);

// "disk-drive" or "maintenance"
Model benchmark(const std::string& name, unsigned n);

}  // namespace actmc
