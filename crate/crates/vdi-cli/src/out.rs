//! Stdout that tolerates a closed pipe: summary lines are best-effort,
//! file outputs are not.

pub fn line(args: std::fmt::Arguments) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{args}");
}

#[macro_export]
macro_rules! outln {
    ($($t:tt)*) => {
        $crate::out::line(format_args!($($t)*))
    };
}
