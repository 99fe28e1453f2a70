//! Multivariate forecasting: windowing, a shared per-series LSTM encoder and
//! the sparse aggregation unit on top of it.

mod forecaster;
mod lstm;
mod series;

pub use forecaster::{
    build_series_graph, evaluate, lstm_hnn_forward, ForecastCheckpoint, FORECAST_CHECKPOINT_FORMAT, predict_original, train_forecaster, ForecastConfig, ForecastScores,
    Forecaster,
};
pub use lstm::{LstmEncoder, LstmTrace};
pub use series::{
    all_windows, make_windows, write_forecast_csv, MultivariateSeries, SeriesScaler, SplitFractions, Window, WindowSplits,
    WindowedSeries,
};
