// Copyright 2026 The QFw Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Routes a Bell circuit through the task manager and prints the counts and
// the modeled service time on each registered backend.
#include <iostream>

#include "qfw/qfw.hpp"

int main()
{
    using namespace qfw;
    const char* text = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[2];\n"
                       "h q[0];\ncx q[0],q[1];\nmeasure q -> c;\n";
    const workloads::System sys(default_config());
    qtm::TaskManager tm;
    for (const auto& d : sys.registry().list_backends()) {
        qtm::Preferences prefs;
        prefs.backend_id = d.id;
        auto task = tm.normalize(text, 1000, 7, prefs);
        const auto dec = qtm::route(task, sys.registry(), sys.config().routing);
        const auto res = qtm::execute_decision(task, dec, sys.registry());
        std::cout << d.id << " (" << qpm::kind_name(d.kind) << "), service " << res.modeled_service_time << " s\n";
        for (const auto& [key, k] : res.counts.table)
            std::cout << "  " << key << " " << k << "\n";
    }
}
