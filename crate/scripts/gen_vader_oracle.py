"""Regenerate crates/core/tests/data/vader_oracle.tsv with the reference scorer.

Requires `pip install vaderSentiment==3.3.2`. Output columns: title, compound.
"""
import sys
from pathlib import Path

from vaderSentiment.vaderSentiment import SentimentIntensityAnalyzer

TITLES = [
    "A New Era of Quantum Computing Begins",
    "Physicists Celebrate a Stunning Breakthrough in Fusion",
    "The Hidden Danger Lurking in Your Tap Water",
    "Why Dark Matter Might Not Exist After All",
    "Mathematicians Prove a Beautiful 50-Year-Old Conjecture",
    "Climate Change Is Killing Coral Reefs Faster Than Expected",
    "AI Can't Fix Everything, but It Can Help",
    "The Surprising Joy of Counting Primes",
    "Deadly Fungus Spreads Across Hospitals Worldwide",
    "Scientists Are Not Happy With the New Vaccine Rules",
    "How a Tiny Worm Could Cure Aging",
    "This Is the Worst Drought in 1,200 Years",
    "A Brilliant Proof That Nobody Understood",
    "Black Holes Are Even Weirder Than We Thought",
    "The Terrible, Wonderful Mathematics of Knots",
    "Why We Still Don't Understand Consciousness",
    "Quantum Gravity Gets a Promising New Test",
    "The Pandemic Left Kids Lonely and Anxious",
    "Good News for Bees: Pesticide Ban Works",
    "Is the Universe Really Expanding Too Fast??",
    "Researchers Fail to Replicate Famous Psychology Study",
    "An Elegant Solution to an Ugly Problem",
    "The Strange Case of the Disappearing Neutrinos",
    "Fusion Power Is Finally Within Reach!",
    "Cancer Cells Hijack the Immune System",
    "Hope and Fear in the Race for a Malaria Vaccine",
    "No Evidence That the Drug Helps Patients",
    "The Most Beautiful Equation Is Also the Most Useful",
    "Wildfires Destroy Rare Ancient Forests",
    "A Lonely Planet Drifting Through Space",
    "Why Octopuses Are So Incredibly Smart",
    "The Failed Promise of Cold Fusion",
    "Gene Editing Saves a Dying Child",
    "Scientists Warn of a Catastrophic Ice Collapse",
    "The Simple Math Behind Fair Elections",
    "Hackers Steal Data From Millions of Patients",
    "The Unreasonable Effectiveness of Random Graphs",
    "A Grim Forecast for Arctic Sea Ice",
    "Robots Learn to Cooperate Without Being Told",
    "Trust in Science Is Slightly Declining",
    "The Weird, Wonderful World of Slime Molds",
    "Exoplanet Hunters Find a Perfect Earth Twin",
    "Physicists Are Kind of Worried About the Muon",
    "A Toxic Legacy: Lead in Old Pipes",
    "The Long Quest to Solve a Simple Puzzle",
    "At Least the Telescope Is Not Broken",
    "Cheating Scandal Rocks the Chess World",
    "The Universe Is Far Less Lonely Than It Seems",
    "Mysterious Radio Bursts Baffle Astronomers",
    "A Truly GREAT Year for Space Exploration",
]

def main(out: Path) -> None:
    analyzer = SentimentIntensityAnalyzer()
    lines = ["title\tcompound"]
    for title in TITLES:
        assert "\t" not in title
        lines.append(f"{title}\t{analyzer.polarity_scores(title)['compound']}")
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")

if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path("crates/core/tests/data/vader_oracle.tsv"))
