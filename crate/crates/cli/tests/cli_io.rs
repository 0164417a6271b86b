//! End-to-end checks of the binary, the sweep file formats, and the
//! stencil-store JSON layout.

use std::fs;
use std::process::Command;

use picmm_cli::config::{KindArg, RunConfig, TileProfile};
use picmm_cli::io::{
    stencil_from_json, stencil_to_json_string, sweep_csv_string, write_sweep_json,
    SWEEP_CSV_HEADER,
};
use picmm_cli::runner::{run, sweep, SweepAxis};
use picmm_core::{
    assemble, AssemblyOptions, Grid, Kind, Order, ParticleSet, PrecisionPolicy, TileShape,
};

fn base_config() -> RunConfig {
    RunConfig {
        dims: vec![6, 6],
        order: 1,
        kind: KindArg::Scalar,
        ppc: 8,
        profile: TileProfile::Fp64,
        seed: 42,
        repeats: 2,
        ..RunConfig::default()
    }
}

#[test]
fn csv_and_json_carry_identical_values() {
    let base = base_config();
    let points = sweep(&base, &SweepAxis::Ppc(vec![2, 8]));
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("report.json");
    write_sweep_json(&json_path, &base, &points).unwrap();
    let csv = sweep_csv_string(&points);

    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), SWEEP_CSV_HEADER);
    for (line, point) in lines.zip(doc["points"].as_array().unwrap()) {
        let fields: Vec<&str> = line.split(',').collect();
        let report = &point["report"];
        assert_eq!(
            fields[0].parse::<u64>().unwrap(),
            point["axis"].as_u64().unwrap()
        );
        assert_eq!(
            fields[1].parse::<f64>().unwrap(),
            report["naive_min_ms"].as_f64().unwrap()
        );
        assert_eq!(
            fields[2].parse::<f64>().unwrap(),
            report["tiled_min_ms"].as_f64().unwrap()
        );
        assert_eq!(
            fields[3].parse::<f64>().unwrap(),
            report["speedup"].as_f64().unwrap()
        );
        assert_eq!(
            fields[4].parse::<f64>().unwrap(),
            report["max_rel_err"].as_f64().unwrap()
        );
        assert_eq!(
            fields[5].parse::<bool>().unwrap(),
            report["checks_passed"].as_bool().unwrap()
        );
    }
}

#[test]
fn reports_are_deterministic_with_one_thread() {
    let config = base_config();
    let a = serde_json::to_value(run(&config).unwrap()).unwrap();
    let b = serde_json::to_value(run(&config).unwrap()).unwrap();
    let strip = |mut v: serde_json::Value| {
        let obj = v.as_object_mut().unwrap();
        for key in [
            "sort_ms",
            "naive_ms",
            "tiled_ms",
            "naive_min_ms",
            "naive_median_ms",
            "tiled_min_ms",
            "tiled_median_ms",
            "speedup",
        ] {
            obj.remove(key);
        }
        v
    };
    assert_eq!(strip(a), strip(b));
}

#[test]
fn binary_writes_report_and_exits_clean() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_picmm"))
        .args([
            "--dims",
            "6,6",
            "--order",
            "1",
            "--kind",
            "scalar",
            "--ppc",
            "4",
            "--repeats",
            "1",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["particles"].as_u64().unwrap(), 36 * 4);
    assert!(report["checks_passed"].as_bool().unwrap());
}

#[test]
fn binary_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_picmm"))
        .args([
            "--dims",
            "6x6",
            "--order",
            "2",
            "--kind",
            "tensorial",
            "--repeats",
            "1",
            "--sweep-ppc",
            "1,3",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with(SWEEP_CSV_HEADER));
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn binary_rejects_infeasible_grid() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_picmm"))
        .args(["--dims", "4,4,4", "--order", "2", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(!status.success());
}

#[test]
fn stencil_json_golden() {
    // one particle at cell 2, xi = 0.25, q = 2, sigma = 1 on an 8-cell line
    let grid = Grid::with_unit_spacing(&[8]).unwrap();
    let ps = ParticleSet::new(vec![[2.25, 0.0, 0.0]], vec![2.0], None, 1.0);
    let (sorted, ranges) = ps.sort_by_cell(&grid).unwrap();
    let opts = AssemblyOptions::new(
        Order::Cic,
        Kind::Scalar,
        TileShape::FP64_8X8X4,
        PrecisionPolicy::FP64,
    );
    let store = assemble(&grid, &sorted, &ranges, &opts).unwrap();

    let expected = r#"{
  "dims": [
    8
  ],
  "spacing": [
    1.0
  ],
  "order": 1,
  "kind": "scalar",
  "format": "fp64",
  "offsets": [
    [
      0
    ],
    [
      1
    ]
  ],
  "values": [
    [
      [
        0.0
      ],
      [
        0.0
      ]
    ],
    [
      [
        0.0
      ],
      [
        0.0
      ]
    ],
    [
      [
        1.125
      ],
      [
        0.375
      ]
    ],
    [
      [
        0.125
      ],
      [
        0.0
      ]
    ],
    [
      [
        0.0
      ],
      [
        0.0
      ]
    ],
    [
      [
        0.0
      ],
      [
        0.0
      ]
    ],
    [
      [
        0.0
      ],
      [
        0.0
      ]
    ],
    [
      [
        0.0
      ],
      [
        0.0
      ]
    ]
  ]
}"#;
    assert_eq!(stencil_to_json_string(&store), expected);
    assert_eq!(stencil_from_json(expected).unwrap(), store);
}
