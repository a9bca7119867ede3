//! Parameter files used by the benchmarks.

/// A sweep with `dims` dimensions of `width` points each, mixing list,
/// linear-range and transformed-range sets.
pub fn parameter_file(dims: usize, width: usize) -> String {
    (0..dims)
        .map(|d| match d % 3 {
            0 => {
                let values: Vec<String> = (0..width).map(|k| format!("VALUE=item{k}")).collect();
                format!("LOOPTYPE=LIST, {}, FUNCTION=ucfirst\n", values.join(", "))
            }
            1 => format!("LOOPTYPE=RANGE, START=1, END={width}, STEP=1\n"),
            _ => format!("LOOPTYPE=RANGE, START=0, END=1, POINTS={width}, FUNCTION=sqrt\n"),
        })
        .collect()
}

/// A file of `sets` three-word list sentences split over continuation lines.
pub fn continued_file(sets: usize) -> String {
    (0..sets)
        .map(|s| format!("LOOPTYPE=LIST,\\\n  VALUE=a{s},\\\n  VALUE=b{s},\\\n  VALUE=${{JT_ID}}_{s}\n"))
        .collect()
}
