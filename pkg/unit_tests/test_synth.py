import io
import json
import logging
import math
import unittest
from collections import defaultdict

import numpy as np

from src import synth
from src.exceptions import DomainError
from src.io_managers.ingest import parse_csv, records_to_frame, tokenize
from src.synth import GeneratorConfig, InjectionSpec

# Configure logging at the module level
logging.basicConfig(level=logging.INFO)


def project_totals(records, zone, date=None):
    totals = defaultdict(int)
    for record in records:
        if record.region == zone and (date is None or record.date == date):
            totals[record.project_name] += record.err_cnt
    return totals


def day_aggregates(records, zone, date):
    totals = defaultdict(int)
    for record in records:
        if record.region == zone and record.date == date:
            totals[(record.project_name, record.procedure_name, record.error_detail)] += record.err_cnt
    return dict(totals)


class TestGenerate(unittest.TestCase):
    """
    Unit tests for the synthetic error log generator.
    """

    def setUp(self):
        self.config = GeneratorConfig(days=10, projects_per_zone=5, daily_volume=300)
        self.records, self.truth = synth.generate(self.config)

    def test_same_seed_same_log(self):
        records, truth = synth.generate(self.config)
        self.assertEqual(records, self.records)
        self.assertEqual(truth.to_dict(), self.truth.to_dict())

    def test_other_seed_other_log(self):
        records, _ = synth.generate(GeneratorConfig(days=10, projects_per_zone=5, daily_volume=300, seed=1))
        self.assertNotEqual(records, self.records)

    def test_records_are_valid_log_rows(self):
        self.assertEqual([r.row_id for r in self.records], list(range(1, len(self.records) + 1)))
        self.assertTrue(all(r.err_cnt >= 1 for r in self.records))
        dates = sorted({r.date for r in self.records})
        self.assertEqual(dates[0], self.config.start_date)
        self.assertLessEqual(dates[-1], self.config.date_of(self.config.days - 1))
        self.assertEqual({r.region for r in self.records}, {"Zone1", "Zone2"})

    def test_log_parses_back_without_rejects(self):
        buffer = io.StringIO()
        records_to_frame(self.records).to_csv(buffer, index=False, lineterminator="\n")
        buffer.seek(0)
        result = parse_csv(buffer)
        self.assertEqual(result.rejected, [])
        self.assertEqual(result.records, self.records)

    def test_degenerate_labels(self):
        records, _ = synth.generate(GeneratorConfig(zones=1, projects_per_zone=1, procedures_per_project=1, days=3))
        self.assertEqual({(r.region, r.project_name, r.procedure_name) for r in records},
                         {("Zone1", "Project01", "Project01.Proc1")})

    def test_messages_come_from_the_procedure_templates(self):
        for record in self.records[:200]:
            templates = self.truth.zones[record.region].templates[record.procedure_name]
            self.assertIn(record.error_detail, [message for message, _ in templates])

    def test_every_procedure_shares_the_generic_messages(self):
        zone_truth = self.truth.zones["Zone1"]
        generic = None
        for procedure, templates in zone_truth.templates.items():
            shared = templates[self.config.templates_per_procedure:]
            self.assertEqual(len(shared), self.config.shared_templates)
            self.assertAlmostEqual(sum(w for _, w in shared), self.config.shared_weight)
            self.assertAlmostEqual(sum(w for _, w in templates), 1.0)
            messages = [m for m, _ in shared]
            generic = generic or messages
            self.assertEqual(messages, generic)
        for message in generic:
            self.assertTrue(set(tokenize(message)) <= set(synth.COMMON_WORDS))

    def test_without_generic_messages(self):
        config = GeneratorConfig(days=2, projects_per_zone=3, shared_templates=0)
        _, truth = synth.generate(config)
        for templates in truth.zones["Zone1"].templates.values():
            self.assertEqual(len(templates), config.templates_per_procedure)
            self.assertAlmostEqual(sum(w for _, w in templates), 1.0)

    def test_truth_is_json_ready(self):
        document = json.loads(json.dumps(self.truth.to_dict()))
        self.assertEqual(document["config"]["start_date"], "2018-04-01")
        for zone in document["zones"].values():
            self.assertAlmostEqual(sum(zone["project_probabilities"].values()), 1.0)

    def test_project_frequencies_match_the_latent_probabilities(self):
        config = GeneratorConfig(zones=1, projects_per_zone=5, days=100, daily_concentration=1e9)
        records, truth = synth.generate(config)
        totals = project_totals(records, "Zone1")
        n = sum(totals.values())
        for project, p in truth.zones["Zone1"].project_probabilities.items():
            standard_error = math.sqrt(p * (1 - p) / n)
            self.assertLessEqual(abs(totals[project] / n - p), 4 * standard_error)

    def test_invalid_configuration(self):
        for overrides in ({"zones": 0}, {"typical_words": 2}, {"daily_volume": 0.0},
                          {"vocabulary_size": 10}, {"min_message_words": 5, "max_message_words": 4},
                          {"shared_weight": 1.0}, {"shared_templates": -1}):
            with self.subTest(**overrides):
                with self.assertRaises(DomainError):
                    GeneratorConfig(**overrides)


class TestInject(unittest.TestCase):
    """
    Unit tests for planting rate spikes, message swaps and new keywords.
    """

    def setUp(self):
        """
        Five days of two zones; injections target day 3 of Zone1.
        """
        self.config = GeneratorConfig(days=5, projects_per_zone=4, daily_volume=500)
        self.records, self.truth = synth.generate(self.config)
        self.zone_truth = self.truth.zones["Zone1"]
        self.date = self.config.date_of(3)
        self.project = max(self.zone_truth.project_probabilities,
                           key=self.zone_truth.project_probabilities.get)

    def _untouched(self, records):
        return [(r.date, r.region, r.project_name, r.procedure_name, r.error_detail, r.err_cnt)
                for r in records if r.date != self.date or r.region != "Zone1"]

    def test_spike_factor_one_changes_nothing(self):
        spec = InjectionSpec(synth.RATE_SPIKE, "Zone1", (self.project,), 3, 1.0)
        injected, manifest = synth.inject(self.records, spec, self.truth)
        self.assertEqual(injected, self.records)
        self.assertEqual(manifest.to_dict()["changes"], [])

    def test_spike_only_touches_the_target(self):
        spec = InjectionSpec(synth.RATE_SPIKE, "Zone1", (self.project,), 3, 10.0)
        injected, _ = synth.inject(self.records, spec, self.truth)
        self.assertEqual(self._untouched(injected), self._untouched(self.records))
        before = project_totals(self.records, "Zone1", self.date)
        after = project_totals(injected, "Zone1", self.date)
        for project in before:
            if project == self.project:
                self.assertGreater(after[project], 5 * before[project])
            else:
                self.assertEqual(after[project], before[project])

    def test_spike_mean_is_the_factor_times_the_latent_rate(self):
        ratios = []
        for seed in range(500):
            config = GeneratorConfig(zones=1, projects_per_zone=10, days=1, seed=seed)
            records, truth = synth.generate(config)
            probabilities = truth.zones["Zone1"].project_probabilities
            project = max(probabilities, key=probabilities.get)
            spec = InjectionSpec(synth.RATE_SPIKE, "Zone1", (project,), 0, 10.0)
            injected, _ = synth.inject(records, spec, truth)
            total = project_totals(injected, "Zone1")[project]
            ratios.append(total / truth.expected_project_volume("Zone1", project))
        ratios = np.array(ratios)
        standard_error = ratios.std(ddof=1) / math.sqrt(len(ratios))
        self.assertLessEqual(abs(ratios.mean() - 10.0), 4 * standard_error)

    def test_full_swap_moves_every_message(self):
        first, second = list(self.zone_truth.procedure_probabilities[self.project])[:2]
        spec = InjectionSpec(synth.MESSAGE_SWAP, "Zone1", (first, second), 3, 1.0)
        injected, manifest = synth.inject(self.records, spec, self.truth)
        self.assertEqual(self._untouched(injected), self._untouched(self.records))
        templates = {
            procedure: {message for message, _ in self.zone_truth.templates[procedure]}
            for procedure in (first, second)
        }
        for record in injected:
            if record.date == self.date and record.region == "Zone1" and record.procedure_name == first:
                self.assertIn(record.error_detail, templates[second])
            if record.date == self.date and record.region == "Zone1" and record.procedure_name == second:
                self.assertIn(record.error_detail, templates[first])
        self.assertEqual(
            sum(n for (_, proc, _), n in manifest.after.items() if proc == first),
            sum(n for (_, proc, _), n in manifest.before.items() if proc == first),
        )

    def test_new_keyword_is_appended(self):
        procedure = max(self.zone_truth.procedure_probabilities[self.project].items(),
                        key=lambda item: item[1])[0]
        spec = InjectionSpec(synth.NEW_KEYWORD, "Zone1", (procedure,), 3, 1.0)
        injected, _ = synth.inject(self.records, spec, self.truth)
        marked = [r for r in injected
                  if r.date == self.date and r.region == "Zone1" and r.procedure_name == procedure]
        self.assertTrue(marked)
        for record in marked:
            self.assertIn(synth.DEFAULT_NEW_KEYWORD, tokenize(record.error_detail))

    def test_manifest_keeps_the_uninjected_aggregates(self):
        spec = InjectionSpec(synth.RATE_SPIKE, "Zone1", (self.project,), 3, 3.0)
        injected, manifest = synth.inject(self.records, spec, self.truth)
        self.assertEqual(manifest.date, self.date)
        self.assertEqual(manifest.before, day_aggregates(self.records, "Zone1", self.date))
        self.assertEqual(manifest.after, day_aggregates(injected, "Zone1", self.date))
        document = manifest.to_dict()
        self.assertEqual(document["injection"]["kind"], synth.RATE_SPIKE)
        self.assertTrue(all(change["project"] == self.project for change in document["changes"]))

    def test_injection_is_reproducible(self):
        spec = InjectionSpec(synth.NEW_KEYWORD, "Zone2", ("Project01.Proc1",), 2, 0.5)
        self.assertEqual(synth.inject(self.records, spec, self.truth)[0],
                         synth.inject(self.records, spec, self.truth)[0])

    def test_invalid_targets(self):
        specs = [
            InjectionSpec(synth.RATE_SPIKE, "Zone1", ("Project99",), 3, 2.0),
            InjectionSpec(synth.RATE_SPIKE, "Zone9", (self.project,), 3, 2.0),
            InjectionSpec(synth.RATE_SPIKE, "Zone1", (self.project,), 5, 2.0),
            InjectionSpec(synth.MESSAGE_SWAP, "Zone1", ("Project01.Proc1", "Nope.Proc1"), 3, 0.5),
            InjectionSpec(synth.NEW_KEYWORD, "Zone1", ("Project01.Proc1",), 3, 0.5, token="error"),
        ]
        for spec in specs:
            with self.subTest(spec=spec):
                with self.assertRaises(DomainError):
                    synth.inject(self.records, spec, self.truth)

    def test_invalid_specs(self):
        with self.assertRaises(DomainError):
            InjectionSpec("flood", "Zone1", ("Project01",), 0, 2.0)
        with self.assertRaises(DomainError):
            InjectionSpec(synth.MESSAGE_SWAP, "Zone1", ("Project01.Proc1",), 0, 0.5)
        with self.assertRaises(DomainError):
            InjectionSpec(synth.NEW_KEYWORD, "Zone1", ("Project01.Proc1",), 0, 1.5)
        with self.assertRaises(DomainError):
            InjectionSpec(synth.RATE_SPIKE, "Zone1", ("Project01",), 0, 0.0)


if __name__ == "__main__":
    unittest.main()
