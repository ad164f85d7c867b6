//! Writes the data behind every figure as CSV (and SVG) into a directory.
//!
//! cargo run --release --example reproduce_figures -- [out_dir]

use std::path::PathBuf;

use latticeprobe::figures::{figure, FigureOptions, FIGURE_COUNT};
use latticeprobe::io::render_svg;

fn main() -> latticeprobe::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    std::fs::create_dir_all(&dir)?;
    for index in 1..=FIGURE_COUNT {
        for ft in figure(index, &FigureOptions::default())? {
            let stem = format!("fig{index}_{}", ft.name);
            ft.table.save_csv(&dir.join(format!("{stem}.csv")))?;
            std::fs::write(dir.join(format!("{stem}.svg")), render_svg(&ft.table, &stem)?)?;
            println!("{stem}: {} rows, columns {}", ft.table.len(), ft.table.columns.join(","));
        }
    }
    Ok(())
}
