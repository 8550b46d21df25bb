//! gnuplot script for the CSV files a mode writes. The CSVs are the
//! contract; this is a convenience.

use crate::config::Mode;
use chiral_decoherence::master_eq::Pipeline;

pub const SCRIPT_FILE: &str = "plot.gp";

pub fn gnuplot_script(mode: Mode, pipelines: &[Pipeline]) -> String {
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n");
    match mode {
        Mode::Rate => {
            s.push_str("set output 'angular.png'\nset xlabel 'theta (rad)'\nset ylabel 'A'\n");
            s.push_str("plot for [c=2:5] 'angular.csv' using 1:c with lines\n");
        }
        Mode::Sweep => {
            s.push_str("set output 'sweep.png'\nset logscale xy\nset xlabel 'T (K)'\nset ylabel 'gamma (1/s)'\n");
            let n = pipelines.len();
            s.push_str(&format!("plot for [c=3:{}] 'sweep.csv' using 1:c with linespoints\n", 2 + n));
        }
        Mode::Evolve => {
            for p in pipelines {
                let name = p.name();
                s.push_str(&format!(
                    "set output 'trajectory_{name}.png'\nset xlabel 't (s)'\nset ylabel 'population / coherence'\n\
                     plot 'trajectory_{name}.csv' using 1:2 with lines, '' using 1:3 with lines, \
                     '' using 1:4 with lines, '' using 1:7 with lines, '' using 1:8 with lines\n"
                ));
            }
        }
        Mode::Verify => s.push_str("# verify mode writes no series\n"),
    }
    s
}
