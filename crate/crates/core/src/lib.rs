//! Parameter-sweep job templates: expand a declarative parameter file into
//! an indexed family of job-template files and drive the resulting jobs
//! through a scheduler backend.

pub mod backend;
pub mod config;
pub mod console;
pub mod enumerator;
pub mod error;
pub mod grammar;
pub mod jobs;
pub mod template;
pub mod value;
pub mod wildcard;

pub use backend::{Backend, SimHost, Submission};
pub use config::{BackendKind, ConfigTable, TemplateKeywords};
pub use console::{BufferConsole, Console, StdConsole};
pub use enumerator::{enumerate, index_label, Sweep, SweepPoint};
pub use error::{Error, ExitCode, Result};
pub use grammar::{parse_parameter_file, parse_template_appendix, ParameterSpec, SetSpec, TemplateAppendix};
pub use jobs::event::{JobEvent, JobState, JobStatus, Manager};
pub use jobs::registry::{JobRegistry, RegistryEntry};
pub use jobs::{InfoMode, JobManager};
pub use template::{create_templates, render_template, template_stem, JobTemplate, Selector};
pub use value::{Scalar, SweepRng, Transform};
