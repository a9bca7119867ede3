//! Output sink for contract text (standard output) and warnings (standard
//! error).

use std::io::Write;

pub trait Console {
    fn write_out(&mut self, text: &str);
    fn write_err(&mut self, text: &str);

    fn line(&mut self, text: &str) {
        self.write_out(text);
        self.write_out("\n");
    }

    fn warn(&mut self, text: &str) {
        self.write_err(text);
        self.write_err("\n");
    }
}

/// Writes straight to the process streams.
#[derive(Debug, Default, Clone, Copy)]
pub struct StdConsole;

impl Console for StdConsole {
    fn write_out(&mut self, text: &str) {
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(text.as_bytes());
        let _ = out.flush();
    }

    fn write_err(&mut self, text: &str) {
        let _ = std::io::stderr().lock().write_all(text.as_bytes());
    }
}

/// Collects everything in memory.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct BufferConsole {
    pub out: String,
    pub err: String,
}

impl Console for BufferConsole {
    fn write_out(&mut self, text: &str) {
        self.out.push_str(text);
    }

    fn write_err(&mut self, text: &str) {
        self.err.push_str(text);
    }
}
