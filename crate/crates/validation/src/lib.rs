//! Holds the workspace acceptance suite (`cargo test -p sqrbm-validation --test acceptance`).
