#!/usr/bin/env python3
"""Convert a FakeNewsNet crawl into the three JSONL files read by `gcal ingest`.

Expected input layout (the FakeNewsNet crawler output):

    <root>/<source>/fake/<news_id>/news content.json
    <root>/<source>/fake/<news_id>/tweets/<tweet_id>.json
    <root>/<source>/fake/<news_id>/replies/<tweet_id>.json   (optional)
    <root>/<source>/real/...

Tweets and replies become comments; their embedded `user` objects become
users. Records the crawler left incomplete are counted and skipped.
"""

import argparse
import collections
import email.utils
import json
import pathlib
import sys
from datetime import datetime, timezone

TWITTER_TIME = "%a %b %d %H:%M:%S %z %Y"


def parse_time(value):
    if isinstance(value, (int, float)):
        return int(value)
    try:
        return int(datetime.strptime(value, TWITTER_TIME).timestamp())
    except (TypeError, ValueError):
        parsed = email.utils.parsedate_to_datetime(value) if value else None
        if parsed is None:
            raise ValueError(f"unreadable timestamp {value!r}")
        if parsed.tzinfo is None:
            parsed = parsed.replace(tzinfo=timezone.utc)
        return int(parsed.timestamp())


def load_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def iter_tweets(news_dir):
    for sub in ("tweets", "replies"):
        folder = news_dir / sub
        if not folder.is_dir():
            continue
        for path in sorted(folder.glob("*.json")):
            data = load_json(path)
            # Reply dumps hold {tweet_id: [reply, ...]}; tweet dumps hold one tweet.
            if isinstance(data, dict) and "id" not in data:
                for replies in data.values():
                    yield from (r for r in replies if isinstance(r, dict))
            elif isinstance(data, dict):
                yield data


def user_record(user):
    return {
        "id": str(user["id"]),
        "followers": int(user.get("followers_count", 0)),
        "friends": int(user.get("friends_count", 0)),
        "statuses": int(user.get("statuses_count", 0)),
        "verified": bool(user.get("verified", False)),
    }


def comment_record(tweet, news_id):
    text = tweet.get("full_text") or tweet.get("text") or ""
    return {
        "id": str(tweet["id"]),
        "news_id": news_id,
        "user_id": str(tweet["user"]["id"]),
        "text": text,
        "timestamp": parse_time(tweet["created_at"]),
        "likes": int(tweet.get("favorite_count", 0)),
        "retweets": int(tweet.get("retweet_count", 0)),
        "replies": int(tweet.get("reply_count", 0)),
    }


def convert(root, source, out):
    stats = collections.Counter()
    news, comments, users = [], [], {}
    seen_comments = set()
    for label, folder in (("fake", "fake"), ("true", "real")):
        base = root / source / folder
        if not base.is_dir():
            print(f"warning: {base} not found", file=sys.stderr)
            continue
        for news_dir in sorted(p for p in base.iterdir() if p.is_dir()):
            content = news_dir / "news content.json"
            if not content.is_file():
                stats["news_without_content"] += 1
                continue
            article = load_json(content)
            text = (article.get("text") or "").strip()
            if not text:
                stats["news_with_empty_text"] += 1
                continue
            news.append({"id": news_dir.name, "label": label, "text": text})
            for tweet in iter_tweets(news_dir):
                try:
                    record = comment_record(tweet, news_dir.name)
                    user = user_record(tweet["user"])
                except (KeyError, TypeError, ValueError):
                    stats["incomplete_tweets"] += 1
                    continue
                if record["id"] in seen_comments:
                    stats["duplicate_tweets"] += 1
                    continue
                seen_comments.add(record["id"])
                comments.append(record)
                users.setdefault(user["id"], user)

    out.mkdir(parents=True, exist_ok=True)
    for name, records in (("news", news), ("comments", comments), ("users", users.values())):
        with open(out / f"{name}.jsonl", "w", encoding="utf-8") as f:
            for record in records:
                f.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
    stats["news"] = len(news)
    stats["comments"] = len(comments)
    stats["users"] = len(users)
    return stats


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--root", required=True, type=pathlib.Path,
                        help="FakeNewsNet crawl directory (contains politifact/, gossipcop/)")
    parser.add_argument("--source", default="politifact", choices=["politifact", "gossipcop"])
    parser.add_argument("--out", required=True, type=pathlib.Path, help="output directory")
    args = parser.parse_args(argv)
    stats = convert(args.root, args.source, args.out)
    for key in sorted(stats):
        print(f"{key} = {stats[key]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
