"""Event classes delivered to subscribers of a training run."""


class BaseEvent:
    def __init__(self, episode):
        self.episode = episode


class EpisodeEndedEvent(BaseEvent):
    def __init__(self, episode, result):
        super(EpisodeEndedEvent, self).__init__(episode)
        self.result = result


class CheckpointSavedEvent(BaseEvent):
    def __init__(self, episode, path):
        super(CheckpointSavedEvent, self).__init__(episode)
        self.path = path
