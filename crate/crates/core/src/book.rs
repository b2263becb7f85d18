//! Runs every code block in the guide under `book/` as a doc-test, so the
//! chapters cannot drift from the library they describe.

#[cfg(doctest)]
macro_rules! chapter {
    ($name:ident, $path:literal) => {
        #[doc = include_str!(concat!("../../../book/src/", $path))]
        pub struct $name;
    };
}

#[cfg(doctest)]
chapter!(Introduction, "introduction.md");
#[cfg(doctest)]
chapter!(ProcessTrees, "process-trees.md");
#[cfg(doctest)]
chapter!(PetriNetsAndReplay, "petri-nets-and-replay.md");
#[cfg(doctest)]
chapter!(GeneratingPopulations, "generating-populations.md");
#[cfg(doctest)]
chapter!(SimulatingLogs, "simulating-logs.md");
#[cfg(doctest)]
chapter!(FoldsAndNoise, "folds-and-noise.md");
#[cfg(doctest)]
chapter!(Discovery, "discovery.md");
#[cfg(doctest)]
chapter!(Statistics, "statistics.md");
#[cfg(doctest)]
chapter!(Experiments, "experiments.md");
