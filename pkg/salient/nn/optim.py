import numpy as np


class Adam:
    """Adam over a flat parameter vector.

    :param float learning_rate: step size; 0 freezes the parameters.
    :param float beta1: decay of the first-moment estimate.
    :param float beta2: decay of the second-moment estimate.
    :param float epsilon: denominator guard.
    """

    def __init__(
            self,
            learning_rate=0.001,
            beta1=0.9,
            beta2=0.999,
            epsilon=1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m = None
        self.v = None
        self.t = 0

    @classmethod
    def from_config(cls, cfg):
        return cls(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)

    def step(self, values, grads):
        """Update ``values`` in place with one Adam step."""
        if self.m is None:
            self.m = np.zeros_like(values)
            self.v = np.zeros_like(values)
        self.t += 1
        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * grads
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * (grads * grads)
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        values -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)
        return values
