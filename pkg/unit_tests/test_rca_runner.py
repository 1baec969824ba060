import datetime as dt
import logging
import unittest
from unittest import mock

from src import synth
from src.exceptions import InsufficientDataError, NoRecordsError, OrderingError
from src.io_managers.configuration_validator import RunConfig
from src.rca_runner import RcaRunner
from src.results_processing.score_series import DailyScoreSeries
from src.tan_model import TanModel, day_scores

# Configure logging at the module level
logging.basicConfig(level=logging.INFO)


class TestRcaRunner(unittest.TestCase):
    """
    Unit tests for warm-up training, the rolling scoring protocol and RCA orchestration.
    """

    def setUp(self):
        """
        Twelve synthetic days over two zones; five warm-up days.
        """
        records, _ = synth.generate(synth.GeneratorConfig(days=12, projects_per_zone=4, daily_volume=200))
        self.config = RunConfig(warmup_days=5, min_doc_frequency=2, reference_days=3)
        self.runner = RcaRunner(self.config)
        self.days = self.runner.prepare_days(records)
        self.model = self.runner.fit(self.days)

    def test_fit_consumes_the_warmup_window(self):
        self.assertEqual(self.model.training_horizon, self.days[4].date)

    def test_fit_until(self):
        model = self.runner.fit(self.days, until=self.days[7].date)
        self.assertEqual(model.training_horizon, self.days[7].date)
        with self.assertRaises(InsufficientDataError):
            self.runner.fit(self.days, until=self.days[2].date)

    def test_fit_needs_enough_days(self):
        with self.assertRaises(InsufficientDataError):
            RcaRunner(RunConfig(warmup_days=20)).fit(self.days)

    def test_score_every_later_day(self):
        model, series = self.runner.score(self.model, self.days)
        self.assertEqual(list(series), [("Zone1", "procedure"), ("Zone1", "project"),
                                        ("Zone2", "procedure"), ("Zone2", "project")])
        for values in series.values():
            self.assertEqual(list(values.dates), [day.date for day in self.days[5:]])
        self.assertEqual(model.training_horizon, self.days[-1].date)
        self.assertEqual(self.model.training_horizon, self.days[4].date)

    def test_each_series_is_built_once(self):
        with mock.patch("src.rca_runner.DailyScoreSeries", wraps=DailyScoreSeries) as constructor:
            _, series = self.runner.score(self.model, self.days)
        self.assertEqual(constructor.call_count, len(series))
        self.assertTrue(all(len(values) == len(self.days) - 5 for values in series.values()))

    def test_each_day_is_scored_by_a_model_of_earlier_days(self):
        _, series = self.runner.score(self.model, self.days)
        for i in range(5, len(self.days)):
            expected = day_scores(
                TanModel.fit(self.days[:i], self.config.prior_scale, self.config.min_doc_frequency),
                self.days[i],
            )
            for zone, zone_score in expected.items():
                date = self.days[i].date
                self.assertAlmostEqual(series[(zone, "project")].score_on(date),
                                       zone_score.project_score, places=12)
                self.assertAlmostEqual(series[(zone, "procedure")].score_on(date),
                                       zone_score.procedure_score, places=12)

    def test_removing_future_days_keeps_past_scores(self):
        _, full = self.runner.score(self.model, self.days)
        _, truncated = self.runner.score(self.model, self.days[:9])
        for key, values in truncated.items():
            self.assertEqual(list(values.scores), list(full[key].scores[:len(values)]))

    def test_short_series_are_not_flagged(self):
        _, series = self.runner.score(self.model, self.days)
        with self.assertLogs("src.rca_runner", level="WARNING"):
            self.assertEqual(self.runner.flag(series), [])

    def test_flag_reports_threshold_and_dates(self):
        scores = [-1.0, -1.1] * 10 + [-9.0]
        dates = [self.days[0].date + dt.timedelta(days=i) for i in range(21)]
        flagged = self.runner.flag({("Zone1", "project"): DailyScoreSeries("Zone1", "project", dates, scores)})
        self.assertEqual(flagged[0]["dates"], [dates[-1]])
        self.assertLess(flagged[0]["threshold"], -1.1)

    def test_rca_reports(self):
        date = self.days[8].date
        project_report, procedure_report = self.runner.rca(self.model, self.days, date, "Zone2")
        self.assertEqual((project_report.kind, procedure_report.kind), ("project", "procedure"))
        self.assertEqual((project_report.date, project_report.zone), (date, "Zone2"))
        self.assertLessEqual(len(project_report.ranked_items), self.config.top_k_projects)
        if procedure_report.keyword_set:
            self.assertEqual(procedure_report.crosstab.reference_days, 3)

    def test_rca_uses_the_model_of_the_previous_day(self):
        date = self.days[8].date
        report, _ = self.runner.rca(self.model, self.days, date, "Zone1")
        rolled = TanModel.fit(self.days[:8], self.config.prior_scale, self.config.min_doc_frequency)
        expected = rolled.zone_snapshot("Zone1").projects.extend(
            self.days[8].zones["Zone1"].project_counts.category_ids
        )
        self.assertEqual(set(report.impacts), set(expected.category_ids))

    def test_rca_needs_an_earlier_model(self):
        model = self.runner.fit(self.days, until=self.days[8].date)
        with self.assertRaises(OrderingError):
            self.runner.rca(model, self.days, self.days[8].date, "Zone1")

    def test_rca_without_records(self):
        with self.assertRaises(NoRecordsError):
            self.runner.rca(self.model, self.days, self.days[8].date, "Zone9")


if __name__ == "__main__":
    unittest.main()
