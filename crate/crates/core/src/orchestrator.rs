// placeholder
pub struct CompileError;
pub struct CompileStats;
pub struct HeuristicFlags;
pub struct Mode;
pub struct StrategyConfig;
pub fn compile() {}
