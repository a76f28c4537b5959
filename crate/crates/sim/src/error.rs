use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid spec field `{path}`: {msg}")]
    Spec { path: String, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("nothing to write: {0}")]
    Empty(&'static str),
    #[error(transparent)]
    Core(#[from] irs_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn spec_err(path: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Spec {
        path: path.into(),
        msg: msg.into(),
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
